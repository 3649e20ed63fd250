//! Desk-scale exactness checks: every exact-mode detector must return the
//! minimizer of `||y - Hx||^2` found by direct enumeration, without QR.
//! Backs the `verify` CLI subcommand.

use crate::channel::{draw_channel_retrying, draw_noise, transmit};
use crate::constellation::{draw_uniform, make_qam, Constellation};
use crate::detectors::{
    detect_bruteforce, detect_dijkstra_bounded, detect_dijkstra_unbounded, detect_qrd_mld,
    objective_pre_qr, Algorithm, DetectorConfig, DetectionProblem,
};
use crate::linalg::{Complex, ComplexVector, OpCounters, rotate_received};
use crate::seeding::{stream_rng, Stream};

#[derive(Debug, Clone)]
pub struct VerifyScenario {
    pub t: usize,
    pub r: usize,
    pub order: usize,
    pub instances: usize,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub scenario: String,
    pub instances: usize,
    pub exact: usize,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.exact == self.instances
    }
}

/// Enumerates `S^t` and returns the minimizer of the pre-QR objective.
/// Deliberately ignorant of QR, branch metrics and every detector path.
pub fn enumerate_ml(
    h: &crate::linalg::ComplexMatrix,
    y: &ComplexVector,
    c: &Constellation,
    t: usize,
) -> ComplexVector {
    let s = c.len();
    let total = s.pow(t as u32);
    let mut best_obj = f64::INFINITY;
    let mut best_idx = 0usize;
    for code in 0..total {
        let mut cand = Vec::with_capacity(t);
        let mut rest = code;
        for _ in 0..t {
            cand.push(c.point(rest % s));
            rest /= s;
        }
        let cand = ComplexVector::from(cand);
        let obj = objective_pre_qr(h, y, &cand);
        if obj < best_obj {
            best_obj = obj;
            best_idx = code;
        }
    }
    let mut cand = Vec::with_capacity(t);
    let mut rest = best_idx;
    for _ in 0..t {
        cand.push(c.point(rest % s));
        rest /= s;
    }
    ComplexVector::from(cand)
}

/// Runs one exactness scenario. When `corrupt` is set the detectors see a
/// slightly offset constellation (a deliberate fault injection), so a healthy
/// verifier must report mismatches.
pub fn run_scenario(sc: &VerifyScenario, seed: u64, corrupt: bool) -> VerifyOutcome {
    let cons = make_qam(sc.order).expect("verify scenario uses a supported order");
    let detector_cons = if corrupt {
        corrupt_constellation(&cons)
    } else {
        cons.clone()
    };
    let snr_db = 12.0;
    let phi2 = crate::channel::noise_variance(snr_db, sc.t, cons.energy());
    let exhaustive_l = cons.len().pow(sc.t as u32);
    let full_m = cons.len().pow(sc.t as u32 - 1);

    let mut exact = 0usize;
    for i in 0..sc.instances {
        let mut rng = stream_rng(seed, Stream::Aux, sc.t as u64 * 1000 + sc.order as u64, i as u64);
        let ch = draw_channel_retrying(&mut rng, sc.t, sc.r).unwrap();
        let x = draw_uniform(&cons, &mut rng, sc.t);
        let z = draw_noise(&mut rng, sc.r, phi2).unwrap();
        let y = transmit(&ch, &x, &z).unwrap();

        let oracle = enumerate_ml(&ch.h, &y, &cons, sc.t);

        let mut ctx = OpCounters::new();
        let xi = rotate_received(&ch.q, &y, &mut ctx).unwrap();
        let problem = DetectionProblem {
            r_mat: &ch.r,
            xi,
            constellation: &detector_cons,
            t: sc.t,
        };

        let mut ctx_bf = OpCounters::new();
        let bf = detect_bruteforce(&problem, 1, &mut ctx_bf).unwrap();
        let mut ctx_du = OpCounters::new();
        let du = detect_dijkstra_unbounded(&problem, 1, &mut ctx_du).unwrap();
        let mut cfg_db = DetectorConfig::new(Algorithm::DijkstraBounded);
        cfg_db.l = exhaustive_l;
        let mut ctx_db = OpCounters::new();
        let db = detect_dijkstra_bounded(&problem, &cfg_db, &mut ctx_db).unwrap();
        let mut cfg_m = DetectorConfig::new(Algorithm::QrdMld);
        cfg_m.m = full_m;
        let mut ctx_m = OpCounters::new();
        let mld = detect_qrd_mld(&problem, &cfg_m, &mut ctx_m);

        let all_match = [&bf, &du, &db, &mld]
            .iter()
            .all(|res| res.estimates[0] == oracle);
        if all_match {
            exact += 1;
        }
    }
    VerifyOutcome {
        scenario: format!("{}x{} {}-QAM", sc.t, sc.r, sc.order),
        instances: sc.instances,
        exact,
    }
}

fn corrupt_constellation(c: &Constellation) -> Constellation {
    // Rebuild with every point nudged off the grid. Only reachable from the
    // fault-injection path of `verify`.
    let shifted: Vec<Complex> = c
        .points()
        .iter()
        .map(|p| p + Complex::new(0.35, 0.0))
        .collect();
    Constellation::from_parts_for_fault_injection(shifted, c.energy(), c.name().to_string())
}

/// The default verification battery: 1000 instances each of 2x2 and 4x4 QPSK.
pub fn default_scenarios(instances: usize) -> Vec<VerifyScenario> {
    vec![
        VerifyScenario {
            t: 2,
            r: 2,
            order: 4,
            instances,
        },
        VerifyScenario {
            t: 4,
            r: 4,
            order: 4,
            instances,
        },
    ]
}
