use braidlie::algebra::{poly_gen, quotient_present, TensorSquarePoly};
use braidlie::grading::rho;
use braidlie::hopf::{
    biproduct_build, enveloping_build, enveloping_relations, hopf_axioms_check, primitives_solve, AxiomResult,
};
use braidlie::lie::{
    bracket_eval, bracket_eval_in, check_jacobi1, check_jacobi2, check_main_theorem, check_symmetry,
    families_with_primitive_zeta, lie_validate, main_theorem_expansion, sweep,
};
use braidlie::syntax::render_poly;
use braidlie::{
    Bicharacter, CycScalar, GeneratorTable, GradedPoly, GroupElement, HopfInstance, HopfReport, HopfStructure,
    LinComb, Permutation, PresentedAlgebra, Root, ZetaFamily,
};

use crate::error::{CliError, CliResult};
use crate::model::{split_top_level, HopfSource, ModelDocument};
use crate::report::RunReport;

/// Flags shared by every command.
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub degree_bound: Option<usize>,
    /// `Some(None)` allows truncation at the model's default length.
    pub truncate: Option<Option<usize>>,
}

pub fn parse_zeta(text: &str) -> CliResult<Root> {
    let scalar: CycScalar = text.parse().map_err(CliError::core(format!("--zeta `{text}`")))?;
    Bicharacter::zeta_root(&scalar).map_err(CliError::core(format!("--zeta `{text}`")))
}

pub fn parse_family(doc: &ModelDocument, text: &str) -> CliResult<Vec<GroupElement>> {
    split_top_level(text)
        .iter()
        .map(|item| doc.group().parse_element(item).map_err(CliError::core(format!("--family `{text}`"))))
        .collect()
}

fn parse_perm(text: &str) -> CliResult<Permutation> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let images = inner
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad permutation `{text}`"))))
        .collect::<CliResult<Vec<_>>>()?;
    Permutation::from_one_line(&images).map_err(CliError::core(format!("--perm `{text}`")))
}

pub fn families(doc: &ModelDocument, n: usize, zeta: Option<&str>, report: &mut RunReport) -> CliResult<()> {
    let chi = &doc.chi;
    report.note(format!("group {}, bicharacter level {}", doc.group(), chi.level()));
    match zeta {
        Some(text) => {
            let root = parse_zeta(text)?;
            let fams = chi.enumerate_zeta_families(n, root).map_err(CliError::core("families"))?;
            report.note(format!("{n}-tuples forming a ({root})-family"));
            for f in &fams {
                report.record(format!("FAMILY {f}"));
            }
            report.record(format!("COUNT {}", fams.len()));
        }
        None => {
            for (root, count) in chi.list_zeta_values(n).map_err(CliError::core("families"))? {
                report.record(format!("ZETA {root} families={count}"));
            }
        }
    }
    Ok(())
}

pub fn rho_command(
    doc: &ModelDocument,
    family: &str,
    zeta: &str,
    perm: Option<&str>,
    report: &mut RunReport,
) -> CliResult<()> {
    let chi = &doc.chi;
    let fam = ZetaFamily::new(chi, parse_zeta(zeta)?, parse_family(doc, family)?).map_err(CliError::core("rho"))?;
    let perms = match perm {
        Some(p) => vec![parse_perm(p)?],
        None => Permutation::all(fam.len()),
    };
    report.note(format!("family {fam} with zeta = {}", fam.zeta()));
    for s in perms {
        let r = rho(chi, &s, &fam).map_err(CliError::core("rho"))?;
        report.record(format!("RHO {s} {r}"));
    }
    Ok(())
}

fn algebra_of(doc: &ModelDocument, opts: Options) -> CliResult<Option<PresentedAlgebra>> {
    doc.presentation
        .as_ref()
        .map(|p| {
            let bound = opts.degree_bound.unwrap_or(p.degree_bound);
            quotient_present(p.table.clone(), &p.relations, bound).map_err(CliError::core("presentation"))
        })
        .transpose()
}

pub fn bracket(
    doc: &ModelDocument,
    family: Option<&str>,
    zeta: &str,
    args: Option<&str>,
    opts: Options,
    report: &mut RunReport,
) -> CliResult<()> {
    let chi = &doc.chi;
    let root = parse_zeta(zeta)?;
    let given = family.map(|f| parse_family(doc, f)).transpose()?;
    let Some(args) = args else {
        let Some(degs) = given else {
            return Err(CliError::Usage("bracket needs --family or --args".into()));
        };
        let fam = ZetaFamily::new(chi, root, degs).map_err(CliError::core("bracket"))?;
        let table = GeneratorTable::formal(doc.group(), fam.members()).map_err(CliError::core("bracket"))?;
        let xs: Vec<GradedPoly> = (0..fam.len() as u32).map(poly_gen).collect();
        let value = bracket_eval(&table, chi, &fam, &xs).map_err(CliError::core("bracket"))?;
        report.note(format!("free algebra on {} of degrees {fam}", table.names().join(", ")));
        report.record(format!("[{}] = {}", table.names().join(","), render_poly(&table, &value)));
        return Ok(());
    };
    let names: Vec<&str> = args.split(',').map(str::trim).collect();
    let shown = format!("[{}]", names.join(","));
    let check_family = |degs: &[GroupElement]| -> CliResult<ZetaFamily> {
        if let Some(g) = &given {
            if g.as_slice() != degs {
                return Err(CliError::Usage(format!("--family does not match the degrees of {shown}")));
            }
        }
        ZetaFamily::new(chi, root, degs.to_vec()).map_err(CliError::core("bracket"))
    };
    let mut evaluated = false;
    if let Some(p) = &doc.presentation {
        if let Ok(idx) = names.iter().map(|n| p.table.index_of(n)).collect::<braidlie::Result<Vec<u32>>>() {
            let degs: Vec<GroupElement> = idx.iter().map(|&i| p.table.gen_degree(i).clone()).collect();
            let fam = check_family(&degs)?;
            let algebra = algebra_of(doc, opts)?.expect("presentation present");
            let xs: Vec<GradedPoly> = idx.iter().map(|&i| poly_gen(i)).collect();
            let value = bracket_eval_in(&algebra, chi, &fam, &xs).map_err(CliError::core("bracket"))?;
            report.record(format!("IN presentation {shown} = {}", render_poly(&p.table, &value)));
            evaluated = true;
        }
    }
    if let Some(lie) = &doc.lie {
        let p = &lie.presentation;
        if let Ok(idx) = names.iter().map(|n| p.basis().index_of(n)).collect::<braidlie::Result<Vec<u32>>>() {
            let degs: Vec<GroupElement> = idx.iter().map(|&i| p.basis().gen_degree(i).clone()).collect();
            check_family(&degs)?;
            let (source, _) = p.lookup(root, &idx).map_err(CliError::core("bracket"))?;
            let value = p.bracket_basis(root, &idx).map_err(CliError::core("bracket"))?;
            report.record(format!(
                "IN lie {shown} = {} ({})",
                render_poly(p.basis(), &value),
                format!("{source:?}").to_lowercase()
            ));
            evaluated = true;
        }
    }
    if !evaluated {
        return Err(CliError::Usage(format!("{shown} does not name generators of the model")));
    }
    Ok(())
}

fn group_elements(doc: &ModelDocument) -> CliResult<Vec<GroupElement>> {
    doc.group().elements().map_err(CliError::core("check-identities"))
}

pub fn check_identities(doc: &ModelDocument, max_n: usize, report: &mut RunReport) -> CliResult<()> {
    let chi = &doc.chi;
    let ctx = "check-identities";
    report.note(format!("group {}, bicharacter level {}", doc.group(), chi.level()));
    let elements = group_elements(doc)?;
    for n in 2..=max_n {
        for (root, _) in chi.list_zeta_values(n).map_err(CliError::core(ctx))? {
            let fams = chi.enumerate_zeta_families(n, root).map_err(CliError::core(ctx))?;
            let results = sweep(&fams, |f| check_symmetry(chi, f));
            let mut failed = None;
            for (f, r) in fams.iter().zip(results) {
                let r = r.map_err(CliError::core(ctx))?;
                if !r.passed && failed.is_none() {
                    failed = Some(format!("{f} sigma={}", r.counterexample.map(|s| s.to_string()).unwrap_or_default()));
                }
            }
            report.check(failed.is_none(), format!("symmetry n={n} zeta={root} families={}", fams.len()));
            if let Some(w) = failed {
                report.record(format!("WITNESS {w}"));
            }
        }

        let prim = families_with_primitive_zeta(chi, n, n).map_err(CliError::core(ctx))?;
        let results = sweep(&prim, |f| check_main_theorem(chi, f));
        let mut failed = None;
        for (f, r) in prim.iter().zip(results) {
            let r = r.map_err(CliError::core(ctx))?;
            if !r.passed && failed.is_none() {
                failed = Some(format!("{f} zeta={}", f.zeta()));
            }
        }
        report.check(failed.is_none(), format!("main-theorem n={n} families={}", prim.len()));
        if let Some(w) = failed {
            report.record(format!("WITNESS {w}"));
        }

        let long = families_with_primitive_zeta(chi, n + 1, n).map_err(CliError::core(ctx))?;
        let results = sweep(&long, |f| check_jacobi1(chi, f));
        let mut failed = None;
        for (f, r) in long.iter().zip(results) {
            let r = r.map_err(CliError::core(ctx))?;
            if !r.passed && failed.is_none() {
                failed = Some(format!("{f} zeta={}", f.zeta()));
            }
        }
        report.check(failed.is_none(), format!("jacobi1 n={n} families={}", long.len()));
        if let Some(w) = failed {
            report.record(format!("WITNESS {w}"));
        }

        let results = sweep(&prim, |f| {
            let mut checked = 0;
            for h in &elements {
                let pairs_ok = f
                    .members()
                    .iter()
                    .all(|g| chi.is_zeta_family_root(Root::minus_one(), &[h.clone(), g.clone()]));
                if !pairs_ok {
                    continue;
                }
                checked += 1;
                if !check_jacobi2(chi, f, h)?.passed {
                    return Ok((checked, Some(format!("{f} zeta={} h={h}", f.zeta()))));
                }
            }
            Ok((checked, None))
        });
        let mut checked = 0;
        let mut failed = None;
        for r in results {
            let (c, w): (usize, Option<String>) = r.map_err(CliError::core(ctx))?;
            checked += c;
            if failed.is_none() {
                failed = w;
            }
        }
        report.check(failed.is_none(), format!("jacobi2 n={n} instances={checked}"));
        if let Some(w) = failed {
            report.record(format!("WITNESS {w}"));
        }
    }

    // ζ = 1 is not a primitive second root: the mixed terms must survive
    if let Some(f) = chi.enumerate_zeta_families(2, Root::one()).map_err(CliError::core(ctx))?.first() {
        let r = main_theorem_expansion(chi, f).map_err(CliError::core(ctx))?;
        report.check(!r.passed, format!("main-theorem-control n=2 zeta=1 family={f} mixed-terms-survive"));
    }

    if let Some(lie) = &doc.lie {
        lie_checks(lie, report)?;
    }
    Ok(())
}

fn lie_checks(lie: &crate::model::LieBlock, report: &mut RunReport) -> CliResult<()> {
    let r = lie_validate(&lie.presentation).map_err(CliError::core("lie"))?;
    report.check(
        r.passed(),
        format!(
            "lie-presentation symmetry={} jacobi1={} jacobi2={}",
            r.symmetry_checked, r.jacobi1_checked, r.jacobi2_checked
        ),
    );
    for v in &r.violations {
        report.record(format!("VIOLATION {v}"));
    }
    Ok(())
}

fn render_completion(algebra: &PresentedAlgebra, report: &mut RunReport) {
    let c = algebra.report();
    report.record(format!(
        "COMPLETION bound={} stabilized={} complete={} rules={} critical_pairs={}",
        algebra.bound(),
        c.stabilized,
        c.complete,
        c.rules,
        c.critical_pairs
    ));
}

pub fn envelop(doc: &ModelDocument, opts: Options, report: &mut RunReport) -> CliResult<()> {
    let Some(lie) = &doc.lie else {
        return Err(CliError::Usage("envelop needs a [lie] block".into()));
    };
    let p = &lie.presentation;
    lie_checks(lie, report)?;
    let relations = enveloping_relations(p).map_err(CliError::core("envelop"))?;
    for r in &relations {
        report.record(format!("RELATION {} = 0", render_poly(p.basis(), r)));
    }
    let bound = opts.degree_bound.unwrap_or(lie.degree_bound);
    let algebra = quotient_present(p.basis().clone(), &relations, bound).map_err(CliError::core("envelop"))?;
    render_completion(&algebra, report);
    for rule in algebra.rules() {
        report.record(format!("RULE {} -> {}", algebra.render_word(&rule.lhs), render_poly(p.basis(), &rule.rhs)));
    }
    let basis = algebra.enumerate_basis(bound).map_err(CliError::core("envelop"))?;
    if basis.finite {
        report.record(format!("BASIS dimension={}", basis.words.len()));
    } else {
        report.note(format!("no finite basis below word length {bound}"));
        for k in 0..=bound {
            let count = basis.words.iter().filter(|w| w.len() == k).count();
            report.record(format!("BASIS length={k} words={count}"));
        }
    }
    Ok(())
}

/// The braided Hopf algebra of the model, finite or truncated.
fn build_hopf(doc: &ModelDocument, opts: Options, report: &mut RunReport) -> CliResult<HopfInstance> {
    let source = match &doc.hopf {
        Some(h) => h.source,
        None if doc.presentation.is_some() => HopfSource::Presentation,
        None if doc.lie.is_some() => HopfSource::Lie,
        None => return Err(CliError::Usage("the model has neither a [presentation] nor a [lie] block".into())),
    };
    let (h, bound) = match source {
        HopfSource::Presentation => {
            let p = doc.presentation.as_ref().expect("validated at load");
            let algebra = algebra_of(doc, opts)?.expect("presentation present");
            let bound = algebra.bound();
            render_completion(&algebra, report);
            let n = p.table.len();
            let block = doc.hopf.as_ref();
            let explicit = block.is_some_and(|b| {
                b.coproduct.iter().any(Option::is_some)
                    || b.counit.iter().any(Option::is_some)
                    || b.antipode.iter().any(Option::is_some)
            });
            let h = if explicit {
                let b = block.expect("explicit maps come from a block");
                let coproduct: Vec<TensorSquarePoly> = (0..n)
                    .map(|i| {
                        b.coproduct[i].clone().unwrap_or_else(|| braidlie::algebra::primitive_tensor(&poly_gen(i as u32)))
                    })
                    .collect();
                let counit = (0..n).map(|i| b.counit[i].clone().unwrap_or_else(CycScalar::zero)).collect();
                let antipode = (0..n).map(|i| b.antipode[i].clone().unwrap_or_else(|| -&poly_gen(i as u32))).collect();
                HopfInstance::new(algebra, doc.chi.clone(), coproduct, counit, antipode)
            } else {
                HopfInstance::with_primitive_generators(algebra, doc.chi.clone())
            };
            (h.map_err(CliError::core("hopf"))?, bound)
        }
        HopfSource::Lie => {
            let lie = doc.lie.as_ref().expect("validated at load");
            let bound = opts.degree_bound.unwrap_or(lie.degree_bound);
            let h = enveloping_build(&lie.presentation, bound, false).map_err(CliError::core("envelop"))?;
            render_completion(h.algebra(), report);
            (h, bound)
        }
    };
    if h.is_finite() {
        return Ok(h);
    }
    let model_t = doc.hopf.as_ref().and_then(|b| b.truncate);
    let t = match opts.truncate {
        Some(Some(t)) => t,
        Some(None) => model_t.unwrap_or(bound),
        None => match model_t {
            Some(t) => t,
            None => {
                return Err(CliError::Core {
                    context: "hopf (pass --truncate to check a truncation)".into(),
                    source: braidlie::Error::InfiniteDimensional,
                })
            }
        },
    };
    let h = h.truncated(t).map_err(CliError::core("hopf"))?;
    if h.truncation_bound().is_some() {
        report.caveat(format!("infinite-dimensional; checked on basis words of length <= {t} only"));
    }
    Ok(h)
}

fn axiom(report: &mut RunReport, a: &AxiomResult) {
    report.checks += 1;
    if !a.passed {
        report.failures += 1;
    }
    report.record(format!("{a} checked={}", a.checked));
}

fn hopf_flags(r: &HopfReport, report: &mut RunReport) {
    report.record(format!("FLAG commutative={}", r.commutative));
    report.record(format!("FLAG cocommutative={}", r.cocommutative));
    report.record(format!("FLAG braided_commutative={}", r.braided_commutative));
    report.record(format!("FLAG braided_cocommutative={}", r.braided_cocommutative));
}

pub fn hopf_check(doc: &ModelDocument, opts: Options, report: &mut RunReport) -> CliResult<()> {
    let h = build_hopf(doc, opts, report)?;
    for i in 0..h.table().len() as u32 {
        let x = poly_gen(i);
        let d = h.comultiply(&x).map_err(CliError::core("hopf"))?;
        let s = h.antipode(&x).map_err(CliError::core("hopf"))?;
        let name = h.table().name(i);
        report.note(format!("delta({name}) = {}", h.render_tensor(&d)));
        report.note(format!("S({name}) = {}", h.render(&s)));
    }
    let r = hopf_axioms_check(&h).map_err(CliError::core("hopf"))?;
    match r.truncation {
        Some(t) => report.record(format!("DIMENSION {} truncated={t}", r.dimension)),
        None => report.record(format!("DIMENSION {}", r.dimension)),
    }
    for a in &r.axioms {
        axiom(report, a);
    }
    hopf_flags(&r, report);
    Ok(())
}

pub fn primitives(doc: &ModelDocument, opts: Options, report: &mut RunReport) -> CliResult<()> {
    let h = build_hopf(doc, opts, report)?;
    let space = primitives_solve(&h).map_err(CliError::core("primitives"))?;
    report.record(format!("PRIMITIVES dimension={}", space.dimension()));
    for (g, basis) in &space.by_degree {
        for p in basis {
            report.record(format!("PRIMITIVE degree={g} {}", h.render(p)));
        }
    }
    Ok(())
}

pub fn biproduct(doc: &ModelDocument, opts: Options, report: &mut RunReport) -> CliResult<()> {
    let ctx = "biproduct";
    let h = build_hopf(doc, opts, report)?;
    if !h.is_finite() || h.truncation_bound().is_some() {
        return Err(CliError::Core { context: ctx.into(), source: braidlie::Error::InfiniteDimensional });
    }
    let bp = biproduct_build(&h).map_err(CliError::core(ctx))?;
    let r = hopf_axioms_check(&bp).map_err(CliError::core(ctx))?;
    report.record(format!("DIMENSION {}", r.dimension));
    for a in &r.axioms {
        axiom(report, a);
    }
    hopf_flags(&r, report);

    let group = doc.group();
    let table = h.table();
    let one = HopfStructure::unit(&bp);
    for (i, &m) in group.torsion().iter().enumerate() {
        let g = group.generator(i);
        let t = bp.group_like(&g);
        let tname = format!("t{}", i + 1);
        let mut tm = one.clone();
        for _ in 0..m {
            tm = bp.multiply(&tm, &t).map_err(CliError::core(ctx))?;
        }
        report.check(tm == one, format!("{tname}^{m} = 1"));
        for j in 0..table.len() as u32 {
            let xname = table.name(j);
            let x = bp.embed(&poly_gen(j));
            let c = doc.chi.eval(&g, table.gen_degree(j));
            let tx = bp.multiply(&t, &x).map_err(CliError::core(ctx))?;
            let xt = bp.multiply(&x, &t).map_err(CliError::core(ctx))?;
            report.check(tx == xt.scaled(&c), format!("{tname}*{xname} = ({c})*{xname}*{tname}"));
        }
    }
    for j in 0..table.len() as u32 {
        let xname = table.name(j);
        let x = bp.embed(&poly_gen(j));
        let mut acc = x.clone();
        for k in 2..=bp.dimension() + 1 {
            acc = bp.multiply(&acc, &x).map_err(CliError::core(ctx))?;
            if acc.is_zero() {
                report.record(format!("NILPOTENT {xname}^{k} = 0"));
                break;
            }
        }
        let key = (braidlie::Word::gen(j), group.zero());
        let d = bp.comultiply_basis(&key).map_err(CliError::core(ctx))?;
        let parts: Vec<String> = d
            .iter()
            .map(|((a, b), c)| {
                format!("{} (x) {}", bp.render(&LinComb::term(a.clone(), c.clone())), bp.render(&LinComb::basis(b.clone())))
            })
            .collect();
        report.record(format!("COPRODUCT {xname} = {}", parts.join(" + ")));
        let s = HopfStructure::antipode_key(&bp, &key).map_err(CliError::core(ctx))?;
        report.record(format!("ANTIPODE {xname} = {}", bp.render(&s)));
    }
    Ok(())
}
