//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test prints a single `PASS` or `FAIL` line with its measured values and
//! wall time; the harness reports the same outcome.

use std::f64::consts::E;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schwartz_lab::geometry::{
    ahlfors_constant, box_counting_dimension, build_koch_snowflake, cantor_gaps_exact, cantor_remainder,
    regular_polygon, sample_intervals, sample_polyline, scale_ladder, ClosedCurve, LengthRule, Point2,
};
use schwartz_lab::maps::{cantor_distance_pair, make_cusp_map, make_mobius, AnyMap, CuspMapRecord, PlaneMap};
use schwartz_lab::numeric::Polynomial;
use schwartz_lab::schwartz::{
    decay_ratios, flatness_check, make_nazarov_f, make_radial_g, SamplePlan, TestFunction, TrendLevel, TrendVerdict,
    FLATNESS_TOLERANCE,
};
use schwartz_lab::verify::{
    interval_obstruction, nazarov_obstruction, suites, Bijection, GrowthClass, TransferEvidence, TransferOrders,
    TransferVerdict,
};

/// Runs `body`, prints one summary line and fails on a false verdict or a blown budget.
fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over budget {budget:?}")),
        Err(d) => (false, d),
    };
    // bypasses the harness's capture of print! so the line shows in every run
    let line = format!("{} [{id:>2}] {name}: {detail} ({elapsed:.2?})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn c01_cantor_enumeration() {
    criterion(1, "cantor enumeration", Duration::from_secs(1), || {
        let out = Command::new(env!("CARGO_BIN_EXE_schwartz-lab"))
            .args(["fixtures", "cantor", "--depth", "3"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let intervals = report["result"]["intervals"].as_array().ok_or("no intervals")?;
        ensure(intervals.len() == 7, || format!("{} intervals", intervals.len()))?;
        let fractions: Vec<(u64, u64)> = intervals
            .iter()
            .map(|g| (g["numerator"].as_u64().unwrap(), g["denominator"].as_u64().unwrap()))
            .collect();
        // (n/d, (n+1)/d): the first three are (1/3, 2/3), (1/9, 2/9), (7/9, 8/9)
        ensure(fractions[..3] == [(1, 3), (1, 9), (7, 9)], || format!("first three {:?}", &fractions[..3]))?;
        for m in 1..=3u32 {
            let count = fractions.iter().filter(|(_, d)| *d == 3u64.pow(m)).count();
            ensure(count == 1 << (m - 1), || format!("{count} gaps of length 3^-{m}"))?;
        }
        ensure(cantor_gaps_exact(3).map_err(|e| e.to_string())?.len() == 7, || "library disagrees".into())?;
        Ok(format!("7 intervals, first {:?}", &fractions[..3]))
    });
}

#[test]
fn c02_dimension_anchors() {
    criterion(2, "box-counting dimension", Duration::from_secs(20), || {
        let koch = build_koch_snowflake(5).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let k = box_counting_dimension(&sample_polyline(&koch, 3f64.powi(-5) / 4.0), &scale_ladder(0.5, 8))
            .map_err(|e| e.to_string())?;
        let koch_time = t.elapsed();
        let t = Instant::now();
        let c = box_counting_dimension(
            &sample_intervals(&cantor_remainder(10), 3f64.powi(-10) / 2.0),
            &scale_ladder(0.25, 12),
        )
        .map_err(|e| e.to_string())?;
        let cantor_time = t.elapsed();
        let (kt, ct) = (4f64.ln() / 3f64.ln(), 2f64.ln() / 3f64.ln());
        ensure((k.slope - kt).abs() <= 0.05, || format!("koch slope {} vs {kt}", k.slope))?;
        ensure((c.slope - ct).abs() <= 0.05, || format!("cantor slope {} vs {ct}", c.slope))?;
        ensure(koch_time < Duration::from_secs(10) && cantor_time < Duration::from_secs(10), || {
            format!("koch {koch_time:?}, cantor {cantor_time:?}")
        })?;
        Ok(format!("koch {:.4} (target {kt:.4}), cantor {:.4} (target {ct:.4})", k.slope, c.slope))
    });
}

/// Exhaustive scan: for every vertex pair, the smaller diameter of the two
/// complementary vertex runs over the chord, with diameters grown point by point.
fn pair_scan_constant(c: &ClosedCurve) -> f64 {
    let v = &c.vertices;
    let n = v.len();
    let mut best = 0.0f64;
    for i in 0..n {
        // inner[j] = diam(v_i..=v_j)
        let mut inner = vec![0.0f64; n];
        for j in i + 1..n {
            let grow = (i..j).map(|k| v[k].dist(v[j])).fold(0.0, f64::max);
            inner[j] = inner[j - 1].max(grow);
        }
        // outer[j] = diam(v_j..v_{n-1}, v_0..=v_i), grown from j = n-1 downwards
        let mut outer = vec![0.0f64; n + 1];
        let base: Vec<usize> = (0..=i).collect();
        let mut d = (0..=i).flat_map(|a| (a + 1..=i).map(move |b| (a, b))).map(|(a, b)| v[a].dist(v[b])).fold(0.0, f64::max);
        for j in (i + 1..n).rev() {
            let grow = base.iter().chain((j + 1..n).collect::<Vec<_>>().iter()).map(|&k| v[k].dist(v[j])).fold(0.0, f64::max);
            d = d.max(grow);
            outer[j] = d;
        }
        for j in i + 1..n {
            let arc = if c.closed { inner[j].min(outer[j]) } else { inner[j] };
            best = best.max(arc / v[i].dist(v[j]));
        }
    }
    best
}

#[test]
fn c03_ahlfors_constant() {
    criterion(3, "three-point constant", Duration::from_secs(10), || {
        let run = |c: &ClosedCurve| ahlfors_constant(c).map(|r| r.constant).map_err(|e| e.to_string());
        let polygon = run(&regular_polygon(512, 1.0).map_err(|e| e.to_string())?)?;
        ensure((1.0..=1.01).contains(&polygon), || format!("512-gon constant {polygon}"))?;
        let koch3 = build_koch_snowflake(3).map_err(|e| e.to_string())?;
        let fast = run(&koch3)?;
        let scan = pair_scan_constant(&koch3);
        ensure((fast - scan).abs() <= 1e-9, || format!("koch-3 {fast} vs scan {scan}"))?;
        let mut all = vec![polygon, fast];
        for k in 0..=4 {
            all.push(run(&build_koch_snowflake(k).map_err(|e| e.to_string())?)?);
        }
        for n in [3, 4, 7, 64] {
            all.push(run(&regular_polygon(n, 2.5).map_err(|e| e.to_string())?)?);
        }
        ensure(all.iter().all(|c| *c >= 1.0), || format!("constant below 1 in {all:?}"))?;
        Ok(format!("512-gon {polygon:.6}, koch-3 {fast:.12} = scan {scan:.12}, {} curves >= 1", all.len()))
    });
}

#[test]
fn c04_mobius_derivatives() {
    criterion(4, "inversion derivatives", Duration::from_secs(1), || {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let inv = make_mobius(zero, one, one, zero).map_err(|e| e.to_string())?;
        let map: AnyMap = inv.clone().into();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut worst_exact, mut worst_fd) = (0.0f64, 0.0f64);
        for _ in 0..1000 {
            let r = rng.gen_range(0.5..2.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(r, t);
            for n in 1..=6usize {
                let d = inv.complex_derivative(z, n).map_err(|e| e.to_string())?.ok_or("no closed form")?;
                let expected = (1..=n).product::<usize>() as f64 / r.powi(n as i32 + 1);
                worst_exact = worst_exact.max((d.norm() - expected).abs() / expected);
            }
            // fourth-order central differences along x for n = 1, 2
            let h = 1e-3;
            let f = |dx: f64| map.apply(&[z.re + dx, z.im]).map(|v| Complex64::new(v[0], v[1]));
            let s: Vec<Complex64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| f(k * h)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            let d1 = (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12.0 * h);
            let d2 = (-s[0] + 16.0 * s[1] - 30.0 * s[2] + 16.0 * s[3] - s[4]) / (12.0 * h * h);
            let e1 = -1.0 / (z * z);
            let e2 = 2.0 / (z * z * z);
            worst_fd = worst_fd.max((d1 - e1).norm() / e1.norm()).max((d2 - e2).norm() / e2.norm());
        }
        ensure(worst_exact <= 1e-9, || format!("closed form off by {worst_exact:e}"))?;
        ensure(worst_fd <= 1e-5, || format!("differences off by {worst_fd:e}"))?;
        Ok(format!("1000 points, n <= 6: closed form {worst_exact:.1e}, differences {worst_fd:.1e}"))
    });
}

#[test]
fn c05_cusp_map_soundness() {
    criterion(5, "cusp map soundness", Duration::from_secs(5), || {
        let mut notes = Vec::new();
        for coeffs in [vec![0.0, 1.0], vec![0.0, 0.0, 1.0]] {
            let p = Polynomial::new(coeffs.clone());
            let rec = CuspMapRecord::new(p.clone()).map_err(|e| e.to_string())?;
            let m = rec.m;
            ensure(rec.b(m).abs() <= 1e-12, || format!("b(M) = {:e} for {coeffs:?}", rec.b(m)))?;
            let min_b = (1..=1000).map(|i| rec.b(m + m * i as f64 / 1001.0)).fold(f64::INFINITY, f64::min);
            ensure(min_b > 0.0, || format!("b <= 0 on (M, 2M) for {coeffs:?}"))?;
            let map: PlaneMap = make_cusp_map(p).map_err(|e| e.to_string())?;
            let mut min_det = f64::INFINITY;
            let mut worst_trip = 0.0f64;
            for i in 1..=200 {
                let u = 3.0 * m * i as f64 / 201.0;
                min_det = min_det.min(rec.jacobian_determinant(u));
                for j in 1..=50 {
                    let q = Point2::new(u, rec.height(u) * j as f64 / 51.0);
                    let back = map.apply(q).and_then(|x| map.apply_inverse(x)).map_err(|e| e.to_string())?;
                    worst_trip = worst_trip.max(back.dist(q));
                }
            }
            ensure(min_det > 0.0, || format!("Jacobian {min_det} for {coeffs:?}"))?;
            ensure(worst_trip <= 1e-8, || format!("round trip {worst_trip:e} for {coeffs:?}"))?;
            notes.push(format!("M = {m}, min b {min_b:.2e}, min det {min_det:.2e}, trip {worst_trip:.1e}"));
        }
        Ok(notes.join("; "))
    });
}

/// Largest per-level growth factor over every trend in the evidence.
fn max_step(ev: &TransferEvidence) -> f64 {
    let trends = ev.forward.iter().chain(&ev.inverse).flat_map(|f| {
        f.seminorms.iter().map(|s| &s.trend).chain(f.decay.iter().map(|d| &d.trend)).collect::<Vec<_>>()
    });
    trends
        .flat_map(|t: &Vec<TrendLevel>| t.windows(2).map(|w| (w[1].ln_sup.0 - w[0].ln_sup.0).exp()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

#[test]
fn c06_transfer_evidence() {
    criterion(6, "transfer evidence", Duration::from_secs(60), || {
        let orders = TransferOrders::default();
        let plan = SamplePlan::default();
        let mut notes = Vec::new();
        let positive = [
            suites::cusp(Polynomial::identity()),
            suites::cantor(6),
            suites::interval_linear(LengthRule::Constant { value: 1.0 }, LengthRule::InversePower { power: 2.0 }, 200),
        ];
        for s in positive {
            let s = s.map_err(|e| e.to_string())?;
            let ev = s.run(&orders, &plan).map_err(|e| e.to_string())?;
            let step = max_step(&ev);
            ensure(ev.verdict == TransferVerdict::Supported && step < 1.01, || {
                format!("{}: {:?}, max growth {step}", s.name, ev.verdict)
            })?;
            ensure(!ev.forward.is_empty() && !ev.inverse.is_empty(), || format!("{}: one direction empty", s.name))?;
            notes.push(format!("{} supported (max growth {step:.4})", s.name));
        }
        let s = suites::exp_log().map_err(|e| e.to_string())?;
        let ev = s.run(&orders, &plan).map_err(|e| e.to_string())?;
        let growth = ev.witness_growth.unwrap_or(0.0);
        ensure(ev.verdict == TransferVerdict::Refuted && growth > 2.0, || {
            format!("exp-log: {:?}, growth {growth}", ev.verdict)
        })?;
        notes.push(format!("exp-log refuted by {} (growth {growth:.3})", ev.witness.unwrap_or_default()));
        Ok(notes.join("; "))
    });
}

#[test]
fn c07_cantor_distance_identity() {
    criterion(7, "cantor distance identity", Duration::from_secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // y is stored to within half an ulp of 1, which 3^10 magnifies past 1e-12 on the x side,
        // so the identity is checked on the y side: |3^-m d(x) - d(y)|
        let (mut worst, mut worst_x_side) = (0.0f64, 0.0f64);
        let mut generations = [0usize; 11];
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=(1u32 << 10) - 1) as f64;
            let x = n + rng.gen_range(0.0..1.0);
            let (dx, dy, m) = cantor_distance_pair(x, 10).map_err(|e| e.to_string())?;
            // independent distance from x to the integers
            let t = x - x.floor();
            ensure(dx == t.min(1.0 - t), || format!("d(x) at {x}"))?;
            let scale = 3f64.powi(m as i32);
            worst = worst.max((dx / scale - dy).abs());
            worst_x_side = worst_x_side.max((dx - scale * dy).abs());
            generations[m as usize] += 1;
        }
        ensure(worst <= 1e-12, || format!("identity off by {worst:e}"))?;
        Ok(format!(
            "10^4 samples, max |3^-m d(x) - d(y)| = {worst:.1e} (x side {worst_x_side:.1e}), generations hit {:?}",
            &generations[1..]
        ))
    });
}

#[test]
fn c08_nazarov_certificate() {
    criterion(8, "disc-chain certificate", Duration::from_secs(1), || {
        // margin e^{n^2} - C e^{n+1} is positive exactly when n^2 > ln C + n + 1
        let oracle = |c: f64| (1..).find(|&n: &usize| (n * n) as f64 > c.ln() + n as f64 + 1.0).unwrap();
        let mut notes = Vec::new();
        for (c, expected) in [(1000.0, 4), (1.0, 2)] {
            let cert = nazarov_obstruction(c, 2, 40).map_err(|e| e.to_string())?;
            ensure(cert.minimal_index == Some(expected) && oracle(c) == expected, || {
                format!("C = {c}: {:?}, oracle {}", cert.minimal_index, oracle(c))
            })?;
            ensure(cert.monotone, || format!("C = {c}: margins not monotone"))?;
            let finite = cert
                .nazarov_margins
                .iter()
                .all(|e| e.margin.ln_abs.is_finite() && e.ln_lower_exponent.0.is_finite() && e.ln_strip_exponent.0.is_finite());
            ensure(finite && cert.nazarov_margins.len() == 39, || format!("C = {c}: non-finite log arithmetic"))?;
            let ln_abs: Vec<f64> = cert.nazarov_margins.iter().skip(expected - 2).map(|e| e.margin.ln_abs).collect();
            ensure(ln_abs.windows(2).all(|w| w[1] > w[0]), || format!("C = {c}: margins decrease"))?;
            notes.push(format!("C = {c}: n = {expected}"));
        }
        Ok(format!("{}; finite to n = 40", notes.join(", ")))
    });
}

#[test]
fn c09_interval_obstruction() {
    criterion(9, "interval obstruction", Duration::from_secs(1), || {
        let cert = interval_obstruction(LengthRule::Exponential { rate: 1.0 }, Bijection::Identity, 40, 1e6)
            .map_err(|e| e.to_string())?;
        for e in &cert.interval_ratios {
            ensure((e.ln_ratio.0 - e.n as f64).abs() <= 1e-9 * e.n as f64, || format!("ln ratio {} at n = {}", e.ln_ratio.0, e.n))?;
        }
        // e^13 < 10^6 < e^14
        let first = (1..).find(|&n: &usize| (n as f64).exp() > 1e6).unwrap();
        ensure(cert.threshold_index == Some(14) && first == 14, || format!("threshold {:?}", cert.threshold_index))?;
        ensure(cert.growth == Some(GrowthClass::Superpolynomial), || format!("growth {:?}", cert.growth))?;
        let poly = interval_obstruction(LengthRule::InversePower { power: 2.0 }, Bijection::Identity, 40, 1e6)
            .map_err(|e| e.to_string())?;
        let degree = match poly.growth {
            Some(GrowthClass::Polynomial { degree }) => degree,
            other => return Err(format!("1/n^2 growth {other:?}")),
        };
        ensure((degree - 2.0).abs() < 0.1, || format!("degree {degree}"))?;
        Ok(format!("e^-n: ratio e^n, threshold n = 14; 1/n^2: polynomial of degree {degree:.3}"))
    });
}

fn decay_steps(f: &TestFunction, plan: &SamplePlan) -> Result<(Vec<TrendVerdict>, f64), String> {
    let reports = decay_ratios(f, f.oracle(), &[1, 2, 3], plan).map_err(|e| e.to_string())?;
    Ok((reports.iter().map(|r| r.verdict).collect(), reports[0].sup_value))
}

#[test]
fn c10_witness_flatness() {
    criterion(10, "witness flatness", Duration::from_secs(10), || {
        let g = make_radial_g();
        let circle: Vec<Vec<f64>> = (0..16).map(|k| {
            let t = k as f64 * std::f64::consts::TAU / 16.0;
            vec![t.cos(), t.sin()]
        }).collect();
        let fg = flatness_check(&g, &circle, 4, 1e-3, FLATNESS_TOLERANCE).map_err(|e| e.to_string())?;
        ensure(fg.pass, || format!("radial witness max coefficient {:e}", fg.max_coefficient))?;
        let f = make_nazarov_f(3).map_err(|e| e.to_string())?;
        // disc tops and bottoms, one oblique point per disc, and the two ends of the chain
        let mut pts = vec![vec![0.0, 0.0], vec![3.0 + 1.0 / 9.0, 0.0]];
        for n in 1..=3 {
            let (c, r) = (n as f64, 1.0 / (n * n) as f64);
            pts.push(vec![c, r]);
            pts.push(vec![c, -r]);
            // the unit disc overlaps the next one, so probe it on its left side
            let t = if n == 1 { 0.75 } else { 0.25 } * std::f64::consts::PI;
            pts.push(vec![c + r * t.cos(), r * t.sin()]);
        }
        let ff = flatness_check(&f, &pts, 4, 1e-4, FLATNESS_TOLERANCE).map_err(|e| e.to_string())?;
        ensure(ff.pass, || {
            let bad: Vec<_> = ff.points.iter().filter(|p| !p.pass).map(|p| p.point.clone()).collect();
            format!("disc-chain witness max coefficient {:e} at {bad:?}", ff.max_coefficient)
        })?;
        let plan = SamplePlan::default();
        let (gv, g1) = decay_steps(&g, &plan)?;
        let (fv, _) = decay_steps(&f, &plan)?;
        ensure(gv.iter().chain(&fv).all(|v| *v == TrendVerdict::Stable), || format!("g {gv:?}, f {fv:?}"))?;
        ensure((g1 - 1.0 / E).abs() <= 1e-3, || format!("g m = 1 sup {g1}"))?;
        Ok(format!(
            "{} + {} boundary points flat; decay m <= 3 stable; g m = 1 sup {g1:.6} (e^-1 = {:.6})",
            circle.len(),
            pts.len(),
            1.0 / E
        ))
    });
}
