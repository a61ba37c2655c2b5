//! Monte-Carlo walk of the HOL chain, weighted by sojourn time, against the
//! closed-form time-average probabilities.

use dcf_core::equilibrium::operating_point;
use dcf_core::hol::steady_state;
use dcf_core::{BackoffConfig, Mechanism, SystemParams, UnitMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Occupancy {
    act: f64,
    suc: f64,
    s: Vec<f64>,
    w: Vec<f64>,
    col: Vec<f64>,
}

impl Occupancy {
    fn add(v: &mut Vec<f64>, i: usize, dt: f64) {
        if v.len() <= i {
            v.resize(i + 1, 0.0);
        }
        v[i] += dt;
    }
}

/// Walks `cycles` service periods and returns time spent per state plus the
/// total elapsed time.
fn walk(params: &SystemParams, x: f64, q: f64, cycles: usize, seed: u64) -> (Occupancy, f64) {
    let ch = dcf_core::ChannelPoint::at(params, x).unwrap();
    let (p, al, al0) = (ch.p, ch.alpha, ch.alpha0);
    let tw = dcf_core::hol::waiting_duration(params, p);
    let (t_act, t_col, t_suc, a) = (params.t_d - params.a, params.t_c - params.a, params.t_suc(), params.a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occ = Occupancy::default();
    let mut total = 0.0;
    for _ in 0..cycles {
        occ.act += t_act;
        total += t_act;
        // Act -> S_0 if the DIFS remainder stays idle, else W_0 -> S_1
        let mut phase = if rng.random::<f64>() < al0 {
            Occupancy::add(&mut occ.s, 0, a);
            total += a;
            let u: f64 = rng.random();
            if u < al * p {
                None
            } else if u < al {
                Occupancy::add(&mut occ.col, 0, t_col);
                total += t_col;
                Some(1)
            } else {
                Occupancy::add(&mut occ.w, 0, tw);
                total += tw;
                Some(1)
            }
        } else {
            Occupancy::add(&mut occ.w, 0, tw);
            total += tw;
            Some(1)
        };
        while let Some(i) = phase {
            Occupancy::add(&mut occ.s, i, a);
            total += a;
            let u: f64 = rng.random();
            let qi = q.powi(i as i32);
            if u >= al {
                Occupancy::add(&mut occ.w, i, tw);
                total += tw;
            } else if u < al * qi {
                if rng.random::<f64>() < p {
                    phase = None;
                } else {
                    Occupancy::add(&mut occ.col, i, t_col);
                    total += t_col;
                    phase = Some(i + 1);
                }
            }
        }
        occ.suc += t_suc;
        total += t_suc;
    }
    (occ, total)
}

#[test]
fn walk_matches_time_average_probabilities() {
    let params = SystemParams::preset(Mechanism::Basic, UnitMode::SlotUnits);
    let q = 0.2;
    let op = operating_point(&params, 10, 0.3, q).unwrap();
    let ss = steady_state(&params, &op.channel, &BackoffConfig::infinite(q).unwrap()).unwrap();

    let cycles = 400_000;
    let (occ, total) = walk(&params, op.x, q, cycles, 7);
    let b_suc = occ.suc / total;
    assert!((b_suc - ss.b_suc).abs() / ss.b_suc < 0.01, "b_suc {b_suc} vs {}", ss.b_suc);
    let mean_return = total / cycles as f64;
    assert!((mean_return - op.moments.mean).abs() / op.moments.mean < 0.01);
    assert!((occ.act / total - ss.b_act).abs() / ss.b_act < 0.01);

    // per-state fractions within 3 sigma of a cycle-level estimate; sigma from
    // 40 independent batches of the walk
    let batches = 40;
    let mut frac = vec![Vec::new(); 4];
    for b in 0..batches {
        let (o, t) = walk(&params, op.x, q, cycles / batches, 100 + b as u64);
        let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0) / t;
        frac[0].push(get(&o.s, 0));
        frac[1].push(get(&o.s, 1));
        frac[2].push(get(&o.w, 1));
        frac[3].push(get(&o.col, 0));
    }
    let expected = [ss.b_s[0], ss.b_s[1], ss.b_w[1], ss.b_col[0]];
    for (f, e) in frac.iter().zip(expected) {
        let m = f.iter().sum::<f64>() / f.len() as f64;
        let var = f.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (f.len() - 1) as f64;
        let se = (var / f.len() as f64).sqrt();
        assert!((m - e).abs() <= 3.0 * se + 1e-12, "mean {m} expected {e} se {se}");
    }
}
