//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use phs_core::matrix::RatMatrix;
use phs_core::model::{builtin_model, builtin_names, physical_params};
use phs_core::phs::section_moment;
use phs_core::rational::{int, parse_fraction, rat};
use phs_core::verify::{check_lemma1, check_limits_and_reductions, check_mutation, mutation_catalogue, Status};
use phs_core::{assemble_phs, Rational, Section};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_phs-forge");

const GOLDEN_RUNTIME: Duration = Duration::from_secs(1);
const LEMMA_RUNTIME: Duration = Duration::from_secs(30);
const CONSERVATION_RUNTIME: Duration = Duration::from_secs(120);
const LEMMA_TRIALS: usize = 20;
const MIN_MUTATIONS: usize = 6;
const CONSERVATION_STEPS: usize = 10_000;
const CONSERVATION_TOL: f64 = 1e-10;
const BALANCE_STEPS: usize = 1_000;
const BALANCE_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("PHS_FORGE_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_ok(dir: &Path, args: &[&str]) -> Result<Output, String> {
    let out = forge(dir, args);
    ensure(out.status.success(), || {
        format!("`{}` exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out)
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn rational_matrix(v: &Value) -> Result<Vec<Vec<Rational>>, String> {
    v.as_array()
        .ok_or("expected an array of rows")?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or("expected a row".to_string())?
                .iter()
                .map(|x| x.as_str().and_then(parse_fraction).ok_or(format!("bad rational {x}")))
                .collect()
        })
        .collect()
}

fn text_matrix(v: &Value) -> Vec<Vec<String>> {
    v.as_array()
        .map(|rows| {
            rows.iter()
                .map(|r| r.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect())
                .collect()
        })
        .unwrap_or_default()
}

fn diag(d: &[Rational]) -> Vec<Vec<Rational>> {
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| if i == j { d[i].clone() } else { Rational::zero() }).collect())
        .collect()
}

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn criterion_1(dir: &Path) -> Outcome {
    let (e, g, kappa, rho, b, h) = (int(2), int(3), rat(5, 6), int(7), rat(1, 2), rat(1, 5));
    let start = Instant::now();
    run_ok(
        dir,
        &[
            "build", "--builtin", "timoshenko", "--param", "E=2", "--param", "G=3", "--param", "kappa=5/6",
            "--param", "rho=7", "--param", "b=1/2", "--param", "h=0.2", "--out", "c1.json",
        ],
    )?;
    let elapsed = start.elapsed();
    let doc = read_json(&dir.join("c1.json"))?;
    let area = &b * &h;
    let second = &b * &h * &h * &h / int(12);
    let m = diag(&[&rho * &second, &rho * &area]);
    let k = diag(&[&e * &second, &kappa * &g * &area]);
    ensure(rational_matrix(&doc["mass"]["entries"])? == m, || "M differs from diag(rho I, rho A)".into())?;
    ensure(rational_matrix(&doc["stiffness"]["entries"])? == k, || "K differs from diag(EI, kappa G A)".into())?;
    let f = strings(&[&["d1", "0"], &["-1", "d1"]]);
    ensure(text_matrix(&doc["f"]["entries"]) == f, || format!("F = {:?}", doc["f"]["entries"]))?;
    let j = strings(&[&["0", "0", "d1", "1"], &["0", "0", "0", "d1"], &["d1", "0", "0", "0"], &["-1", "d1", "0", "0"]]);
    ensure(text_matrix(&doc["j"]["entries"]) == j, || format!("J = {:?}", doc["j"]["entries"]))?;
    let one = Rational::one();
    let z = Rational::zero();
    let p0 = vec![
        vec![z.clone(), z.clone(), z.clone(), one.clone()],
        vec![z.clone(); 4],
        vec![z.clone(); 4],
        vec![-one.clone(), z.clone(), z.clone(), z.clone()],
    ];
    ensure(rational_matrix(&doc["j"]["p0"])? == p0, || "J multiplication part differs".into())?;
    ensure(elapsed < GOLDEN_RUNTIME, || format!("build took {elapsed:?}"))?;
    Ok(format!("M, K, F and the 4x4 J match exactly; build {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

/// Thickness moment of `[-h/2, h/2]` for even `i`.
fn ibar(h: &Rational, i: u32) -> Rational {
    let num = (0..=i).fold(Rational::one(), |acc, _| acc * h);
    num / (int(2).pow(i as i32) * int(i as i64 + 1))
}

fn reddy_oracle(e: &Rational, nu: &Rational, g: &Rational, rho: &Rational, h: &Rational) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let alpha = int(4) / (int(3) * h * h);
    let a = &alpha;
    let bend = ibar(h, 2) - int(2) * a * ibar(h, 4) + a * a * ibar(h, 6);
    let cross = a * (ibar(h, 4) - a * ibar(h, 6));
    let top = a * a * ibar(h, 6);
    let shear = ibar(h, 0) - int(6) * a * ibar(h, 2) + int(9) * a * a * ibar(h, 4);

    let mut m = vec![vec![Rational::zero(); 5]; 5];
    for k in 0..2 {
        m[k][k] = rho * &bend;
        m[k][3 + k] = rho * &cross;
        m[3 + k][k] = rho * &cross;
        m[3 + k][3 + k] = rho * &top;
    }
    m[2][2] = rho * ibar(h, 0);

    let s = e / (Rational::one() - nu * nu);
    let cb = [
        [s.clone(), &s * nu, Rational::zero()],
        [&s * nu, s.clone(), Rational::zero()],
        [Rational::zero(), Rational::zero(), &s * (Rational::one() - nu) / int(2)],
    ];
    let mut k = vec![vec![Rational::zero(); 8]; 8];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = &cb[i][j] * &bend;
            k[i][5 + j] = &cb[i][j] * &cross;
            k[5 + i][j] = &cb[i][j] * &cross;
            k[5 + i][5 + j] = &cb[i][j] * &top;
        }
    }
    k[3][3] = g * &shear;
    k[4][4] = g * &shear;
    (m, k)
}

fn criterion_2(dir: &Path) -> Outcome {
    let spot = section_moment(&Section::Interval { h: int(1) }, 2).map_err(|e| e.to_string())?;
    ensure(spot.pi_pow == 0 && spot.coef == rat(1, 12), || format!("I2(h=1) = {spot:?}"))?;
    ensure(ibar(&int(1), 2) == rat(1, 12), || "oracle I2(h=1) != 1/12".into())?;
    let mut slowest = Duration::ZERO;
    let cases = [
        ("1", "0", "1", "1", "1"),
        ("2e11", "3/10", "8e10", "7850", "1/10"),
        ("5", "1/4", "2", "3", "7/3"),
    ];
    for (i, (e, nu, g, rho, h)) in cases.iter().enumerate() {
        let out = format!("c2_{i}.json");
        let ps = [format!("E={e}"), format!("nu={nu}"), format!("G={g}"), format!("rho={rho}"), format!("h={h}")];
        let mut args = vec!["build", "--builtin", "reddy_plate", "--out", &out];
        for p in &ps {
            args.extend(["--param", p.as_str()]);
        }
        let start = Instant::now();
        run_ok(dir, &args)?;
        slowest = slowest.max(start.elapsed());
        let doc = read_json(&dir.join(&out))?;
        let exact = |s: &str| parse_fraction(s).or_else(|| {
            let (m, x) = s.split_once('e')?;
            Some(parse_fraction(m)? * int(10).pow(x.parse::<i32>().ok()?))
        });
        let v: Vec<Rational> = [e, nu, g, rho, h].iter().map(|s| exact(s).unwrap()).collect();
        let (m, k) = reddy_oracle(&v[0], &v[1], &v[2], &v[3], &v[4]);
        ensure(rational_matrix(&doc["mass"]["entries"])? == m, || format!("case {i}: M differs from the block formula"))?;
        ensure(rational_matrix(&doc["stiffness"]["entries"])? == k, || format!("case {i}: K differs from the block formula"))?;
    }
    ensure(slowest < GOLDEN_RUNTIME, || format!("build took {slowest:?}"))?;
    Ok(format!(
        "I2(h=1) = 1/12; M (5x5) and K (8x8) exact for {} parameter sets; slowest build {:.0} ms",
        cases.len(),
        slowest.as_secs_f64() * 1e3
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let models: Vec<_> = builtin_names()
        .into_iter()
        .map(|n| builtin_model(n, &phs_core::model::default_params(n).unwrap()).unwrap())
        .collect();
    let refs: Vec<_> = models.iter().collect();
    let lemma = check_lemma1(&refs, LEMMA_TRIALS, None, 0);
    ensure(lemma.len() == models.len() * LEMMA_TRIALS, || format!("{} identity checks", lemma.len()))?;
    let bad: Vec<_> = lemma.iter().filter(|c| c.status != Status::Pass).map(|c| c.id.clone()).collect();
    ensure(bad.is_empty(), || format!("nonzero residual in {bad:?}"))?;

    let catalogue = mutation_catalogue();
    ensure(catalogue.len() >= MIN_MUTATIONS, || format!("only {} mutations", catalogue.len()))?;
    for m in &catalogue {
        let r = check_mutation(m, LEMMA_TRIALS, 0);
        let detail = r.detail.clone().unwrap_or_default();
        ensure(r.status == Status::Pass, || format!("{} survived", r.id))?;
        ensure(!detail.ends_with("residual 0"), || format!("{}: zero witness", r.id))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < LEMMA_RUNTIME, || format!("suite took {elapsed:?}"))?;
    Ok(format!(
        "{} builtins x {LEMMA_TRIALS} pairs exactly zero; {}/{} mutations detected; {:.1} s",
        models.len(),
        catalogue.len(),
        catalogue.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_4(dir: &Path) -> Outcome {
    let limits = check_limits_and_reductions();
    for id in ["limits/reddy-mindlin", "limits/rayleigh-euler-bernoulli", "limits/torsion-two-strain"] {
        let c = limits.iter().find(|c| c.id == id).ok_or(format!("{id} missing"))?;
        ensure(c.status == Status::Pass, || format!("{id}: {:?}", c.witness))?;
    }
    run_ok(dir, &["build", "--builtin", "euler_bernoulli", "--out", "c4.json"])?;
    let doc = read_json(&dir.join("c4.json"))?;
    let j = strings(&[&["0", "-d1^2"], &["d1^2", "0"]]);
    ensure(text_matrix(&doc["j"]["entries"]) == j, || format!("EB J = {:?}", doc["j"]["entries"]))?;
    let out = forge(dir, &["verify", "--model", "torsion", "--json", "c4_torsion.json"]);
    ensure(out.status.success(), || "verify --model torsion failed".into())?;
    let report = read_json(&dir.join("c4_torsion.json"))?;
    let has_torsion = report["checks"]
        .as_array()
        .is_some_and(|cs| cs.iter().any(|c| c["id"] == "limits/torsion-two-strain" && c["status"] == "pass"));
    ensure(has_torsion, || "torsion report lacks the two-strain reduction".into())?;
    Ok("Reddy(alpha=0) = Mindlin, Rayleigh -> EB gives [[0,-d1^2],[d1^2,0]], G I_t + G I_t = G I_p".into())
}

fn criterion_5() -> Outcome {
    let e = int(200_000_000_000);
    let nu = rat(3, 10);
    let expected = [
        ("E", e.clone()),
        ("nu", nu.clone()),
        ("G", &e / (int(2) * (Rational::one() + &nu))),
        ("kappa", rat(5, 6)),
        ("h", rat(1, 10)),
        ("rho", int(7850)),
    ];
    let names = builtin_names();
    for name in &names {
        let p = physical_params(name).map_err(|e| e.to_string())?;
        for (k, v) in &expected {
            if let Some(got) = p.get(*k) {
                ensure(got == v, || format!("{name}: {k} = {got}"))?;
            }
        }
        let s = assemble_phs(&builtin_model(name, &p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for (which, q) in [("M", &s.mass.q), ("K", &s.stiffness.q)] {
            let minors = RatMatrix::leading_minors(q);
            ensure(minors.iter().all(|d| d > &Rational::zero()), || format!("{name}: {which} minors {minors:?}"))?;
        }
    }
    Ok(format!("all leading minors of M and K positive for {} builtins", names.len()))
}

fn energy_rows(path: &Path) -> Result<Vec<[f64; 4]>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("step,time,H,boundary_power,residual"), || "energy CSV header".into())?;
    lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().map_err(|_| format!("bad float in `{l}`"))).collect::<Result<_, _>>()?;
            Ok([f[0], f[1], f[2], f[3]])
        })
        .collect()
}

fn criterion_6(dir: &Path) -> Outcome {
    let runs: [(&str, &str, &str); 8] = [
        ("string", "256", "1e-3"),
        ("truss", "256", "1e-3"),
        ("timoshenko", "128", "1e-3"),
        ("rayleigh_beam", "128", "1e-3"),
        ("euler_bernoulli", "128", "1e-4"),
        ("elasticity2d", "24,24", "1e-3"),
        ("mindlin_plate", "16,16", "1e-3"),
        ("reddy_plate", "12,12", "1e-3"),
    ];
    let steps = CONSERVATION_STEPS.to_string();
    let start = Instant::now();
    let mut worst = (0.0_f64, "");
    for (model, cells, dt) in runs {
        let csv = format!("c6_{model}.csv");
        run_ok(
            dir,
            &[
                "simulate", "--model", model, "--cells", cells, "--dt", dt, "--steps", &steps, "--bc", "left=clamped",
                "--init", "random:1", "--energy", &csv,
            ],
        )?;
        let rows = energy_rows(&dir.join(&csv))?;
        ensure(rows.len() == CONSERVATION_STEPS + 1, || format!("{model}: {} energy rows", rows.len()))?;
        let (h0, h1) = (rows[0][1], rows[rows.len() - 1][1]);
        ensure(h0 > 0.0, || format!("{model}: H(0) = {h0}"))?;
        let drift = (h1 - h0).abs() / h0;
        ensure(drift <= CONSERVATION_TOL, || format!("{model}: relative drift {drift:e}"))?;
        if drift >= worst.0 {
            worst = (drift, model);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= CONSERVATION_RUNTIME, || format!("runs took {elapsed:?}"))?;
    Ok(format!("8 models, worst drift {:.2e} ({}); {:.1} s", worst.0, worst.1, elapsed.as_secs_f64()))
}

fn balance(dir: &Path, tag: &str, args: &[&str]) -> Result<(f64, f64), String> {
    let csv = format!("c7_{tag}.csv");
    let steps = BALANCE_STEPS.to_string();
    let mut all = vec!["simulate", "--steps", &steps, "--dt", "1e-3", "--init", "zero", "--energy", &csv];
    all.extend(args);
    run_ok(dir, &all)?;
    let rows = energy_rows(&dir.join(&csv))?;
    ensure(rows.len() == BALANCE_STEPS + 1, || format!("{tag}: {} rows", rows.len()))?;
    let mut worst = 0.0_f64;
    for w in rows.windows(2) {
        let ([_, h0, ..], [t1, h1, p, _]) = (w[0], w[1]);
        let dt = t1 - w[0][0];
        let scaled = (h1 - h0 - dt * p).abs() / h1.abs().max(1.0);
        ensure(scaled <= BALANCE_TOL, || format!("{tag}: residual {scaled:e} at t = {t1}"))?;
        worst = worst.max(scaled);
    }
    let h_end = rows[rows.len() - 1][1];
    ensure(h_end > 0.0, || format!("{tag}: no energy injected"))?;
    Ok((worst, h_end))
}

fn criterion_7(dir: &Path) -> Outcome {
    let (a, ha) = balance(
        dir,
        "timoshenko",
        &["--model", "timoshenko", "--cells", "64", "--bc", "left=clamped", "--input", "right=1,1"],
    )?;
    let (b, hb) = balance(
        dir,
        "truss",
        &["--model", "truss", "--cells", "64", "--bc", "left=clamped,right=clamped", "--input", "distributed=1"],
    )?;
    Ok(format!(
        "Timoshenko traction: worst {a:.2e} (H(T) = {ha:.3e}); truss B_d force: worst {b:.2e} (H(T) = {hb:.3e})"
    ))
}

fn criterion_8(dir: &Path) -> Outcome {
    let a = forge(dir, &["verify", "--all", "--seed", "7", "--json", "c8_a.json"]);
    let b = forge(dir, &["verify", "--all", "--seed", "7", "--json", "c8_b.json"]);
    ensure(a.status.success() && b.status.success(), || "verify --all --seed 7 reported failures".into())?;
    let ra = std::fs::read(dir.join("c8_a.json")).map_err(|e| e.to_string())?;
    let rb = std::fs::read(dir.join("c8_b.json")).map_err(|e| e.to_string())?;
    ensure(ra == rb, || "reports differ".into())?;
    ensure(a.stdout == b.stdout, || "console reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", ra.len()))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let criteria: Vec<(u8, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "timoshenko golden", Box::new(|| criterion_1(d))),
        (2, "reddy plate golden", Box::new(|| criterion_2(d))),
        (3, "integration-by-parts suite and mutations", Box::new(criterion_3)),
        (4, "reduction identities", Box::new(|| criterion_4(d))),
        (5, "positive definite M and K", Box::new(criterion_5)),
        (6, "closed-system conservation", Box::new(|| criterion_6(d))),
        (7, "discrete power balance", Box::new(|| criterion_7(d))),
        (8, "deterministic verify report", Box::new(|| criterion_8(d))),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in &criteria {
        match f() {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(why) => {
                println!("[FAIL] {id} {name}: {why}");
                failed.push(*id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
