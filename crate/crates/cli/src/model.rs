//! Model files: line-oriented blocks of `key [argument] = value` entries.
//!
//! ```text
//! # comment
//! [meta]
//! name = taft3
//! command = biproduct
//!
//! [group]
//! torsion = 3
//! free_rank = 0
//! chi_level = 3
//! chi_matrix = 1
//!
//! [presentation]
//! generators = x:1
//! relation = x^3
//! degree_bound = 6
//!
//! [lie]
//! component 1 = x, y
//! component 2 = z
//! bracket z^1@3 [x,x,y] = z
//! undeclared = zero
//!
//! [hopf]
//! source = presentation
//! coproduct x = x(x)1 + 1(x)x
//! counit x = 0
//! antipode x = -x
//! biproduct = true
//! truncate = 6
//! ```
//!
//! `chi_level` and `chi_matrix` may also sit in a separate `[bicharacter]`
//! block. Matrix rows are separated by `;`, entries by spaces or commas.

use std::path::Path;

use braidlie::syntax::{parse_poly, parse_tensor};
use braidlie::{
    AbelianGroup, Bicharacter, BracketEntry, CycScalar, GeneratorTable, GradedPoly, GroupElement,
    LiePresentation, TensorSquarePoly, UndeclaredPolicy,
};

use crate::error::{CliError, CliResult};

pub const DEFAULT_DEGREE_BOUND: usize = 8;

#[derive(Clone, Debug)]
pub struct Presentation {
    pub table: GeneratorTable,
    pub relations: Vec<GradedPoly>,
    pub degree_bound: usize,
}

#[derive(Clone, Debug)]
pub struct LieBlock {
    pub presentation: LiePresentation,
    pub degree_bound: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopfSource {
    Presentation,
    Lie,
}

#[derive(Clone, Debug)]
pub struct HopfBlock {
    pub source: HopfSource,
    /// Per generator of the presentation; `None` means primitive.
    pub coproduct: Vec<Option<TensorSquarePoly>>,
    pub counit: Vec<Option<CycScalar>>,
    pub antipode: Vec<Option<GradedPoly>>,
    pub biproduct: bool,
    pub truncate: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ModelDocument {
    /// File name without directories, used in report echoes.
    pub file: String,
    pub name: String,
    pub description: String,
    pub commands: Vec<String>,
    pub chi: Bicharacter,
    pub presentation: Option<Presentation>,
    pub lie: Option<LieBlock>,
    pub hopf: Option<HopfBlock>,
}

impl ModelDocument {
    pub fn group(&self) -> &AbelianGroup {
        self.chi.group()
    }
}

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    arg: String,
    value: String,
    line: usize,
    /// One-based column of the first character of `value`.
    col: usize,
}

#[derive(Clone, Debug)]
struct Block {
    name: String,
    entries: Vec<Entry>,
}

const BLOCKS: &[(&str, &[&str])] = &[
    ("meta", &["name", "description", "command"]),
    ("group", &["torsion", "free_rank", "chi_level", "chi_matrix"]),
    ("bicharacter", &["chi_level", "chi_matrix"]),
    ("presentation", &["generators", "relation", "relations", "degree_bound"]),
    ("lie", &["component", "bracket", "undeclared", "degree_bound"]),
    ("hopf", &["source", "coproduct", "counit", "antipode", "biproduct", "truncate"]),
];

/// Keys that take an argument between the key and `=`.
const WITH_ARG: &[&str] = &["component", "bracket", "coproduct", "counit", "antipode"];

pub fn load_model(path: &Path) -> CliResult<ModelDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let file = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_model(&file, &text)
}

pub fn parse_model(file: &str, text: &str) -> CliResult<ModelDocument> {
    let blocks = split_blocks(file, text)?;
    Builder { file, blocks: &blocks }.build()
}

fn split_blocks(file: &str, text: &str) -> CliResult<Vec<Block>> {
    let perr = |line: usize, col: usize, message: String| CliError::Parse {
        path: file.to_string(),
        line,
        col,
        message,
    };
    let mut blocks: Vec<Block> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.chars().take_while(|c| c.is_whitespace()).count();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(perr(line, indent + 1, "unterminated block header".into()));
            };
            let name = name.trim();
            if !BLOCKS.iter().any(|(b, _)| *b == name) {
                return Err(perr(line, indent + 2, format!("unknown block `{name}`")));
            }
            if blocks.iter().any(|b| b.name == name) {
                return Err(perr(line, indent + 2, format!("block `{name}` appears twice")));
            }
            blocks.push(Block { name: name.into(), entries: Vec::new() });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(perr(line, indent + 1, "entry outside of a block".into()));
        };
        let chars: Vec<char> = raw.chars().collect();
        let Some(eq) = chars.iter().position(|&c| c == '=') else {
            return Err(perr(line, chars.len() + 1, "expected `=`".into()));
        };
        let head: String = chars[..eq].iter().collect();
        let mut words = head.split_whitespace();
        let key = words.next().unwrap_or("").to_string();
        let arg = head.trim().strip_prefix(key.as_str()).unwrap_or("").trim().to_string();
        let allowed = BLOCKS.iter().find(|(b, _)| *b == block.name).map(|(_, keys)| *keys).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(perr(line, indent + 1, format!("unknown key `{key}` in [{}]", block.name)));
        }
        if WITH_ARG.contains(&key.as_str()) == arg.is_empty() {
            let message = if arg.is_empty() {
                format!("`{key}` needs an argument before `=`")
            } else {
                format!("`{key}` takes no argument")
            };
            return Err(perr(line, indent + 1, message));
        }
        let after = &chars[eq + 1..];
        let skip = after.iter().take_while(|c| c.is_whitespace()).count();
        let value: String = after[skip..].iter().collect();
        block.entries.push(Entry { key, arg, value: value.trim_end().to_string(), line, col: eq + 2 + skip });
    }
    Ok(blocks)
}

struct Builder<'a> {
    file: &'a str,
    blocks: &'a [Block],
}

impl<'a> Builder<'a> {
    fn block(&self, name: &str) -> Option<&'a Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    fn entries(&self, block: &str, key: &str) -> Vec<&'a Entry> {
        self.block(block).map(|b| b.entries.iter().filter(|e| e.key == key).collect()).unwrap_or_default()
    }

    fn single(&self, block: &str, key: &str) -> CliResult<Option<&'a Entry>> {
        let found = self.entries(block, key);
        match found.as_slice() {
            [] => Ok(None),
            [e] => Ok(Some(e)),
            [_, e, ..] => Err(self.perr(e, 1, format!("`{key}` given twice"))),
        }
    }

    fn perr(&self, e: &Entry, offset: usize, message: String) -> CliError {
        CliError::Parse { path: self.file.into(), line: e.line, col: e.col + offset - 1, message }
    }

    /// Core parse errors carry a column within the value.
    fn lift(&self, block: &str, e: &Entry) -> impl Fn(braidlie::Error) -> CliError + '_ {
        let block = block.to_string();
        let e = e.clone();
        move |err| match err {
            braidlie::Error::Parse { col, message, .. } => self.perr(&e, col, message),
            other => CliError::validation(&block, format!("line {}: {other}", e.line)),
        }
    }

    fn usize_value(&self, e: &Entry) -> CliResult<usize> {
        e.value.parse().map_err(|_| self.perr(e, 1, format!("expected a nonnegative integer, found `{}`", e.value)))
    }

    fn build(&self) -> CliResult<ModelDocument> {
        let text = |key: &str| -> CliResult<String> {
            Ok(self.single("meta", key)?.map(|e| e.value.clone()).unwrap_or_default())
        };
        let name = text("name")?;
        let description = text("description")?;
        let commands = self.entries("meta", "command").into_iter().map(|e| e.value.clone()).collect();
        let chi = self.bicharacter()?;
        let presentation = self.presentation(chi.group())?;
        let lie = self.lie(&chi)?;
        let hopf = self.hopf(presentation.as_ref(), lie.is_some())?;
        Ok(ModelDocument { file: self.file.into(), name, description, commands, chi, presentation, lie, hopf })
    }

    fn int_list(&self, e: &Entry) -> CliResult<Vec<i64>> {
        let mut out = Vec::new();
        let mut offset = 1;
        for part in e.value.split(|c: char| c == ',' || c.is_whitespace()) {
            if !part.is_empty() {
                out.push(part.parse().map_err(|_| self.perr(e, offset, format!("expected an integer, found `{part}`")))?);
            }
            offset += part.chars().count() + 1;
        }
        Ok(out)
    }

    fn bicharacter(&self) -> CliResult<Bicharacter> {
        let torsion = match self.single("group", "torsion")? {
            Some(e) => self
                .int_list(e)?
                .into_iter()
                .map(|m| u32::try_from(m).map_err(|_| CliError::validation("group", format!("bad torsion order {m}"))))
                .collect::<CliResult<Vec<u32>>>()?,
            None => Vec::new(),
        };
        let free_rank = match self.single("group", "free_rank")? {
            Some(e) => self.usize_value(e)?,
            None => 0,
        };
        let group = AbelianGroup::new(torsion, free_rank).map_err(|err| CliError::validation("group", err))?;

        let pick = |key: &str| -> CliResult<Option<(&'static str, &'a Entry)>> {
            match (self.single("group", key)?, self.single("bicharacter", key)?) {
                (Some(_), Some(e)) => Err(self.perr(e, 1, format!("`{key}` given in both [group] and [bicharacter]"))),
                (Some(e), None) => Ok(Some(("group", e))),
                (None, Some(e)) => Ok(Some(("bicharacter", e))),
                (None, None) => Ok(None),
            }
        };
        let level = match pick("chi_level")? {
            Some((_, e)) => {
                let l = self.usize_value(e)?;
                u32::try_from(l).ok().filter(|&l| l > 0).ok_or_else(|| self.perr(e, 1, "level must be positive".into()))?
            }
            None => 1,
        };
        let r = group.rank();
        let (block, matrix) = match pick("chi_matrix")? {
            Some((block, e)) => {
                let mut rows = Vec::new();
                for row in e.value.split(';') {
                    let sub = Entry { value: row.to_string(), ..e.clone() };
                    rows.push(self.int_list(&sub)?);
                }
                if r == 0 && rows.iter().all(Vec::is_empty) {
                    rows.clear();
                }
                (block, rows)
            }
            None => ("group", vec![vec![0; r]; r]),
        };
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(CliError::validation(block, format!("chi_matrix must be {r}x{r} for {group}")));
        }
        Bicharacter::new(group, level, matrix).map_err(|err| CliError::validation(block, err))
    }

    fn degree(&self, block: &str, group: &AbelianGroup, text: &str, line: usize) -> CliResult<GroupElement> {
        group.parse_element(text).map_err(|err| {
            let reason = match err {
                braidlie::Error::Parse { message, .. } => message,
                other => other.to_string(),
            };
            CliError::validation(block, format!("line {line}: degree `{}` for {group}: {reason}", text.trim()))
        })
    }

    fn presentation(&self, group: &AbelianGroup) -> CliResult<Option<Presentation>> {
        if self.block("presentation").is_none() {
            return Ok(None);
        }
        let Some(gens) = self.single("presentation", "generators")? else {
            return Err(CliError::validation("presentation", "missing `generators`"));
        };
        let mut named = Vec::new();
        for item in split_top_level(&gens.value) {
            let Some((name, deg)) = item.split_once(':') else {
                return Err(self.perr(gens, 1, format!("expected `name:degree`, found `{item}`")));
            };
            named.push((name.trim().to_string(), self.degree("presentation", group, deg, gens.line)?));
        }
        let table = GeneratorTable::new(group.clone(), named).map_err(|err| CliError::validation("presentation", err))?;
        let mut relations = Vec::new();
        for key in ["relation", "relations"] {
            for e in self.entries("presentation", key) {
                let mut offset = 0;
                for part in e.value.split(';') {
                    let lead = part.chars().take_while(|c| c.is_whitespace()).count();
                    let sub = Entry { value: part.trim().to_string(), col: e.col + offset + lead, ..e.clone() };
                    if !sub.value.is_empty() {
                        let rel = parse_poly(&table, &sub.value).map_err(self.lift("presentation", &sub))?;
                        if !table.is_homogeneous(&rel) {
                            return Err(CliError::validation(
                                "presentation",
                                format!("line {}: relation `{}` is not homogeneous", e.line, sub.value),
                            ));
                        }
                        relations.push(rel);
                    }
                    offset += part.chars().count() + 1;
                }
            }
        }
        let degree_bound = match self.single("presentation", "degree_bound")? {
            Some(e) => self.usize_value(e)?,
            None => DEFAULT_DEGREE_BOUND,
        };
        Ok(Some(Presentation { table, relations, degree_bound }))
    }

    fn lie(&self, chi: &Bicharacter) -> CliResult<Option<LieBlock>> {
        if self.block("lie").is_none() {
            return Ok(None);
        }
        let group = chi.group();
        let mut named = Vec::new();
        for e in self.entries("lie", "component") {
            let deg = self.degree("lie", group, &e.arg, e.line)?;
            for name in e.value.split(',') {
                let name = name.trim();
                if name.is_empty() {
                    return Err(self.perr(e, 1, "empty basis name".into()));
                }
                named.push((name.to_string(), deg.clone()));
            }
        }
        if named.is_empty() {
            return Err(CliError::validation("lie", "no `component` entries"));
        }
        let basis = GeneratorTable::new(group.clone(), named).map_err(|err| CliError::validation("lie", err))?;
        let mut entries = Vec::new();
        for e in self.entries("lie", "bracket") {
            let Some((zeta_text, args_text)) = e.arg.split_once('[') else {
                return Err(CliError::validation("lie", format!("line {}: expected `bracket <zeta> [a,b,...] = value`", e.line)));
            };
            let args_text = args_text.trim().strip_suffix(']').ok_or_else(|| {
                CliError::validation("lie", format!("line {}: unterminated argument list", e.line))
            })?;
            let zeta_scalar: CycScalar = zeta_text
                .trim()
                .parse()
                .map_err(|err| CliError::validation("lie", format!("line {}: bad zeta `{}`: {err}", e.line, zeta_text.trim())))?;
            let zeta = Bicharacter::zeta_root(&zeta_scalar).map_err(|err| CliError::validation("lie", format!("line {}: {err}", e.line)))?;
            let args = args_text
                .split(',')
                .map(|a| basis.index_of(a.trim()))
                .collect::<braidlie::Result<Vec<u32>>>()
                .map_err(|err| CliError::validation("lie", format!("line {}: {err}", e.line)))?;
            let value = parse_poly(&basis, &e.value).map_err(self.lift("lie", e))?;
            entries.push(BracketEntry { zeta, args, value });
        }
        let policy = match self.single("lie", "undeclared")? {
            None => UndeclaredPolicy::Error,
            Some(e) => match e.value.as_str() {
                "error" => UndeclaredPolicy::Error,
                "zero" => UndeclaredPolicy::Zero,
                other => return Err(self.perr(e, 1, format!("expected `error` or `zero`, found `{other}`"))),
            },
        };
        let degree_bound = match self.single("lie", "degree_bound")? {
            Some(e) => self.usize_value(e)?,
            None => DEFAULT_DEGREE_BOUND,
        };
        let presentation = LiePresentation::new(chi.clone(), basis, entries, policy)
            .map_err(|err| CliError::validation("lie", err))?;
        Ok(Some(LieBlock { presentation, degree_bound }))
    }

    fn hopf(&self, presentation: Option<&Presentation>, has_lie: bool) -> CliResult<Option<HopfBlock>> {
        if self.block("hopf").is_none() {
            return Ok(None);
        }
        let source = match self.single("hopf", "source")? {
            None if presentation.is_some() => HopfSource::Presentation,
            None => HopfSource::Lie,
            Some(e) => match e.value.as_str() {
                "presentation" => HopfSource::Presentation,
                "lie" => HopfSource::Lie,
                other => return Err(self.perr(e, 1, format!("expected `presentation` or `lie`, found `{other}`"))),
            },
        };
        match source {
            HopfSource::Presentation if presentation.is_none() => {
                return Err(CliError::validation("hopf", "source is the presentation but there is no [presentation] block"));
            }
            HopfSource::Lie if !has_lie => {
                return Err(CliError::validation("hopf", "source is the Lie presentation but there is no [lie] block"));
            }
            _ => {}
        }
        let n = presentation.map_or(0, |p| p.table.len());
        let mut coproduct = vec![None; n];
        let mut counit = vec![None; n];
        let mut antipode = vec![None; n];
        for key in ["coproduct", "counit", "antipode"] {
            for e in self.entries("hopf", key) {
                let Some(p) = presentation.filter(|_| source == HopfSource::Presentation) else {
                    return Err(CliError::validation("hopf", format!("line {}: `{key}` needs source = presentation", e.line)));
                };
                let i = p.table.index_of(&e.arg).map_err(|err| CliError::validation("hopf", format!("line {}: {err}", e.line)))?
                    as usize;
                let dup = match key {
                    "coproduct" => coproduct[i].replace(parse_tensor(&p.table, &e.value).map_err(self.lift("hopf", e))?).is_some(),
                    "counit" => counit[i]
                        .replace(e.value.parse::<CycScalar>().map_err(self.lift("hopf", e))?)
                        .is_some(),
                    _ => antipode[i].replace(parse_poly(&p.table, &e.value).map_err(self.lift("hopf", e))?).is_some(),
                };
                if dup {
                    return Err(self.perr(e, 1, format!("`{key} {}` given twice", e.arg)));
                }
            }
        }
        let biproduct = match self.single("hopf", "biproduct")? {
            None => false,
            Some(e) => match e.value.as_str() {
                "true" => true,
                "false" => false,
                other => return Err(self.perr(e, 1, format!("expected `true` or `false`, found `{other}`"))),
            },
        };
        let truncate = self.single("hopf", "truncate")?.map(|e| self.usize_value(e)).transpose()?;
        Ok(Some(HopfBlock { source, coproduct, counit, antipode, biproduct, truncate }))
    }
}

/// Split on commas that are not inside parentheses.
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}
