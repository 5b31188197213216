//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hems_core::building::lti::{input, Inputs, N_INPUTS};
use hems_core::building::predict;
use hems_core::control::oracle::{oracle_best, tiny_problem, MAX_GRID_POINTS};
use hems_core::control::{solve_mpc, tracking_error, ComfortBand, MpcConfig};
use hems_core::der::{battery_step, max_feasible_power, pv_power, BatterySpec, BatteryState, Direction, PvSpec};
use hems_core::heating::{hp_apportion, hp_demand, hp_outdoor, HpRatings, BTU_H_TO_KW};
use hems_core::powerflow::route;
use hems_core::sim::{emit_report, run_scenario, RunConfig, Scenario, ScenarioResult, Summary};
use hems_core::time::STEP_HOURS;

const REL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * b.abs().max(1e-300) || a == b
}

struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn new() -> Self {
        Checks {
            failures: Vec::new(),
            count: 0,
        }
    }

    fn eq(&mut self, what: &str, got: f64, want: f64) {
        self.count += 1;
        if !close(got, want) {
            self.failures.push(format!("{what}: {got} vs {want}"));
        }
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.count += 1;
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

fn criterion_1() -> Outcome {
    let mut c = Checks::new();
    let r = HpRatings::default();

    // Demand: rated indoor capacities are 8700, 8700 and 13600 Btu/h.
    let d = hp_demand(&[1.0, 0.5, 0.25], &r).unwrap();
    c.eq("demand", d, (8700.0 + 4350.0 + 3400.0) * 0.000293071);

    // Outdoor unit at and just below the 0.4 branch split.
    let (q_rated, p_rated) = (10.0, 3.0);
    let at = hp_outdoor(4.0, q_rated, p_rated).unwrap();
    c.eq("PLR_OU at split", at.plr_ou, 0.4);
    c.eq("P at PLR 0.4", at.p_hp_ou, 0.5736 * p_rated);
    let x: f64 = 0.4 - 1e-13;
    let below = hp_outdoor(x * q_rated, q_rated, p_rated).unwrap();
    let cubic = 0.0109 + 0.9863 * x - 2.3784 * x * x + 4.8146 * x * x * x;
    c.eq("P just below 0.4", below.p_hp_ou, cubic * p_rated);
    c.eq("lower-branch value at 0.4", cubic, 0.3330104);
    c.holds("lower-branch value rounds to 0.33301", (cubic * 1e5).round() == 33301.0);
    let full = hp_outdoor(25.0, q_rated, p_rated).unwrap();
    c.eq("PLR_OU capped", full.plr_ou, 1.0);
    c.eq("P at full load", full.p_hp_ou, 1.248 * p_rated);
    c.eq("Q at full load", full.q_hp_ou, q_rated);

    // Apportionment when demand is twice the outdoor capacity.
    let demand = hp_demand(&[1.0, 1.0, 1.0], &r).unwrap();
    let ap = hp_apportion(&[1.0, 1.0, 1.0], demand, demand / 2.0, &r);
    c.eq("capacity factor", ap.f_capacity, 0.5);
    c.eq("apportioned B1 heat", ap.q_hp[0], 0.5 * 8700.0 * BTU_H_TO_KW);

    // PV.
    let pv = pv_power(1000.0, &PvSpec::default()).unwrap();
    c.eq("PV at 1000 W/m²", pv, 0.1488 * 1000.0 * 32.7 * 0.74 * 0.78 / 1000.0);
    c.holds("PV rounds to 2.8085 kW", (pv * 1e4).round() == 28085.0);
    c.eq("PV at night", pv_power(0.0, &PvSpec::default()).unwrap(), 0.0);

    // Battery energy and SOC.
    let spec = BatterySpec::default();
    let b = BatteryState::new(spec, 50.0).unwrap();
    let up = battery_step(&b, 5.0, STEP_HOURS).unwrap();
    c.eq("charge energy", up.e_b, 6.75 + 5.0 * 0.95 * 0.0625);
    c.eq("charge SOC", up.soc(), 100.0 * (6.75 + 0.296875) / 13.5);
    let down = battery_step(&b, -5.0, STEP_HOURS).unwrap();
    c.eq("discharge energy", down.e_b, 6.75 - 0.296875);
    let near = BatteryState::new(spec, 89.0).unwrap();
    c.eq(
        "charge headroom at 89%",
        max_feasible_power(&near, Direction::Charge, STEP_HOURS),
        0.135 / (0.95 * 0.0625),
    );
    c.holds("SOC overshoot rejected", battery_step(&near, 5.0, STEP_HOURS).is_err());

    // Tracking errors.
    let band = ComfortBand {
        lb: 22.5,
        set: 23.0,
        ub: 23.5,
    };
    let (e_set, e_bound) = tracking_error(24.0, &band);
    c.eq("upper bound error", e_bound, 0.5);
    c.eq("upper setpoint error", e_set, 1.0);
    let (e_set, e_bound) = tracking_error(21.9, &band);
    c.eq("lower bound error", e_bound, 0.6);
    c.eq("lower setpoint error", e_set, 1.1);
    c.eq("inside band", tracking_error(23.2, &band).1, 0.0);

    // Routing.
    let f = route(3.0, 0.0, 2.0, 1.0, 0.0);
    c.eq("surplus PV to grid", f.p_pv_g, 1.0);
    c.eq("PV to house", f.p_pv_h, 2.0);
    let f = route(2.0, 1.5, 1.0, 0.5, 0.0);
    c.eq("PV to house share", f.p_pv_h, 1.0);
    c.eq("PV to battery", f.p_pv_b, 1.0);
    c.eq("grid to battery", f.p_g_b, 0.5);
    let f = route(0.0, -4.0, 3.0, 0.0, 0.5);
    c.eq("battery to house", f.p_b_h, 2.0);
    c.eq("battery to grid", f.p_b_g, 2.0);
    c.eq("grid to house", f.p_g_h, 1.0);

    let detail = if c.failures.is_empty() {
        format!("{} hand-derived values within 1e-9 relative", c.count)
    } else {
        c.failures.join("; ")
    };
    outcome(c.failures.is_empty(), detail)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let mut worst = 0.0f64;
    let mut negative = 0;
    for _ in 0..n {
        let p_pv = rng.gen_range(0.0..4.0);
        let p_b = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-5.0..5.0) };
        let p_load = rng.gen_range(0.0..12.0);
        let f = route(p_pv, p_b, p_load, rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let scale = p_pv.abs().max(p_b.abs()).max(p_load).max(1.0);
        let house = (f.p_pv_h + f.p_b_h + f.p_g_h - p_load).abs();
        let pv = (f.p_pv_h + f.p_pv_b + f.p_pv_g - p_pv).abs();
        let battery = (f.p_pv_b + f.p_g_b - f.p_b_h - f.p_b_g - p_b).abs();
        worst = worst.max(house.max(pv).max(battery) / scale);
        if f.channels().iter().any(|v| *v < 0.0) {
            negative += 1;
        }
    }
    outcome(
        worst <= REL && negative == 0,
        format!("{n} random calls, worst relative imbalance {worst:.2e}, {negative} negative flows"),
    )
}

fn soc_range(r: &ScenarioResult) -> (f64, f64) {
    r.records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x.soc), hi.max(x.soc)))
}

fn criterion_3(runs: &Runs) -> Outcome {
    let tol = 1e-9;
    let check = |r: &ScenarioResult, lo: f64, hi: f64| {
        let violations = r.records.iter().filter(|x| x.soc < lo - tol || x.soc > hi + tol).count();
        let (a, b) = soc_range(r);
        (violations, format!("{} SOC {a:.2}–{b:.2}% ({violations} violations)", r.scenario))
    };
    let results = [
        check(&runs.case1, 10.0, 90.0),
        check(&runs.case1_repeat, 10.0, 90.0),
        check(&runs.base, 50.0, 90.0),
        check(&runs.comfort_only, 10.0, 90.0),
    ];
    let total: usize = results.iter().map(|r| r.0).sum();
    let detail = results.iter().map(|r| r.1.as_str()).collect::<Vec<_>>().join(", ");
    outcome(total == 0, detail)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let mut p = tiny_problem(1000 + seed).unwrap();
        let (j_star, _) = oracle_best(&mut p, 5, MAX_GRID_POINTS).unwrap();
        let j = solve_mpc(&mut p, None, &MpcConfig::default()).unwrap().objective;
        // 5% of |J*| above the grid optimum; equals 1.05·J* when J* > 0.
        let limit = j_star + 0.05 * j_star.abs();
        worst_ratio = worst_ratio.max((j - j_star) / j_star.abs().max(1e-12));
        if j > limit {
            failures.push(format!("seed {seed}: J={j:.4} J*={j_star:.4}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    let detail = if failures.is_empty() {
        format!(
            "20 instances, worst (J − J*)/|J*| = {worst_ratio:+.4}, {:.1} s",
            elapsed.as_secs_f64()
        )
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

fn criterion_5(s: &Sums) -> Outcome {
    let (c1, base, co) = (
        s.case1.cost.net_cad_per_day,
        s.base.cost.net_cad_per_day,
        s.comfort_only.cost.net_cad_per_day,
    );
    let vs_base = 1.0 - c1 / base;
    let vs_co = 1.0 - c1 / co;
    let pass = c1 < base && base < co && vs_base >= 0.05 && vs_co >= 0.15;
    outcome(
        pass,
        format!(
            "net C$/day: case1 {c1:.3}, base {base:.3}, comfort_only {co:.3}; case1 {:.1}% below base, {:.1}% below comfort_only",
            100.0 * vs_base,
            100.0 * vs_co
        ),
    )
}

fn criterion_6(s: &Summary) -> Outcome {
    let idx = s.time_in_target.margins_c.iter().position(|m| *m == 0.5).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (zone, curve) in &s.time_in_target.zones {
        let exc = s.max_excursion_c[zone];
        pass &= curve[idx] >= 85.0 && exc <= 2.0;
        parts.push(format!("{zone} {:.1}% max excursion {exc:.2} °C", curve[idx]));
    }
    outcome(pass, format!("within ±0.5 °C: {}", parts.join(", ")))
}

fn criterion_7(r: &ScenarioResult) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in &r.identification {
        pass &= f.validation_within_2c >= 0.6;
        parts.push(format!("{} {:.1}% (RMSE {:.3} °C)", f.zone, 100.0 * f.validation_within_2c, f.validation_rmse));
    }
    // Superposition: response to (x1 + x2, u1 + u2) equals the sum of responses.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let l = 256;
    for f in &r.identification {
        let random_inputs = |rng: &mut ChaCha8Rng| -> Vec<Inputs> {
            (0..l)
                .map(|_| {
                    let mut u = [0.0; N_INPUTS];
                    u[input::Q_HP] = rng.gen_range(0.0..3.0);
                    u[input::Q_BB] = rng.gen_range(0.0..2.0);
                    u[input::T_EXT] = rng.gen_range(-20.0..5.0);
                    u[input::Q_SG] = rng.gen_range(0.0..1.0);
                    u[input::Q_IG] = rng.gen_range(0.0..1.0);
                    u[input::T_GND] = rng.gen_range(4.0..8.0);
                    u
                })
                .collect()
        };
        let (u1, u2) = (random_inputs(&mut rng), random_inputs(&mut rng));
        let (x1, x2) = ([rng.gen_range(15.0..25.0), 20.0], [21.0, rng.gen_range(15.0..25.0)]);
        let sum_u: Vec<Inputs> = u1
            .iter()
            .zip(&u2)
            .map(|(a, b)| std::array::from_fn(|i| a[i] + b[i]))
            .collect();
        let y1 = predict(&f.model, x1, &u1, l).unwrap();
        let y2 = predict(&f.model, x2, &u2, l).unwrap();
        let y = predict(&f.model, [x1[0] + x2[0], x1[1] + x2[1]], &sum_u, l).unwrap();
        for k in 0..l {
            worst = worst.max((y[k] - y1[k] - y2[k]).abs() / y[k].abs().max(1.0));
        }
    }
    pass &= worst <= REL;
    outcome(pass, format!("within ±2 °C: {}; superposition error {worst:.1e}", parts.join(", ")))
}

fn criterion_8(s: &Summary) -> Outcome {
    match s.heating.average_cop {
        Some(cop) => outcome((2.5..=3.8).contains(&cop), format!("case1 average COP {cop:.3}")),
        None => outcome(false, "heat pump never ran"),
    }
}

fn criterion_9(runs: &Runs) -> Outcome {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = emit_report(&runs.case1, dir_a.path()).unwrap();
    let b = emit_report(&runs.case1_repeat, dir_b.path()).unwrap();
    let mut identical = true;
    let mut bytes = 0;
    for (pa, pb) in a.iter().zip(&b) {
        let (fa, fb) = (std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
        bytes += fa.len();
        identical &= fa == fb;
    }
    let secs = runs.case1_time.as_secs_f64();
    outcome(
        identical && secs <= 600.0,
        format!(
            "{} report files ({bytes} bytes) {}; 8-day case1 run {secs:.1} s",
            a.len(),
            if identical { "byte-identical" } else { "DIFFER" }
        ),
    )
}

struct Runs {
    case1: ScenarioResult,
    case1_repeat: ScenarioResult,
    base: ScenarioResult,
    comfort_only: ScenarioResult,
    case1_time: Duration,
}

struct Sums {
    case1: Summary,
    base: Summary,
    comfort_only: Summary,
}

fn run(s: Scenario) -> ScenarioResult {
    run_scenario(&RunConfig::for_scenario(s)).unwrap_or_else(|e| panic!("{s} run failed: {e}"))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "equation unit suite", criterion_1()),
        (2, "conservation fuzzing", criterion_2()),
    ];
    results.push((4, "oracle equivalence", criterion_4()));

    let t = Instant::now();
    let case1 = run(Scenario::Case1);
    let case1_time = t.elapsed();
    let runs = Runs {
        case1_repeat: run(Scenario::Case1),
        base: run(Scenario::Base),
        comfort_only: run(Scenario::ComfortOnly),
        case1,
        case1_time,
    };
    let sums = Sums {
        case1: runs.case1.summary(),
        base: runs.base.summary(),
        comfort_only: runs.comfort_only.summary(),
    };
    results.push((3, "SOC safety", criterion_3(&runs)));
    results.push((5, "directional cost ordering", criterion_5(&sums)));
    results.push((6, "comfort", criterion_6(&sums.case1)));
    results.push((7, "identification", criterion_7(&runs.case1)));
    results.push((8, "heat-pump efficiency", criterion_8(&sums.case1)));
    results.push((9, "determinism and runtime", criterion_9(&runs)));
    results.sort_by_key(|r| r.0);

    println!();
    let mut all = true;
    for (n, name, o) in &results {
        all &= o.pass;
        println!("criterion {n} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!();
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
