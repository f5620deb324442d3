use rotacover::cantor::{
    corrupt_stage, envelope_check, init_measure, run_construction, subdivide, CantorOpts, StageMeasure,
};
use rotacover::{CircleArc, Vec2};

fn assert_stage_invariants(mu: &StageMeasure) {
    assert!((mu.total_mass() - 1.0).abs() < 1e-12, "mass {}", mu.total_mass());
    for w in mu.arcs.windows(2) {
        assert!(w[0].arc.length >= w[1].arc.length);
    }
    for a in &mu.arcs {
        assert!(mu.original.contains_arc(&a.arc));
    }
    let mut sorted: Vec<_> = mu.arcs.iter().map(|a| (a.arc.start, a.arc.end())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        assert!(w[0].1 <= w[1].0, "overlap {w:?}");
    }
    mu.validate().unwrap();
}

/// Stages produced by repeated subdivision with a fixed `N`, without the frequency search.
fn subdivision_chain(n_sub: usize, steps: usize) -> Vec<StageMeasure> {
    let mut mu = init_measure(CircleArc::new(0.2, 1.0).unwrap()).unwrap();
    mu.r_n = Some(1.0);
    let mut out = vec![mu.clone()];
    for _ in 0..steps {
        mu = subdivide(&mu, n_sub);
        mu.r_n = Some(1.0);
        out.push(mu.clone());
    }
    out
}

#[test]
fn subdivision_keeps_stage_invariants() {
    for n_sub in [2, 3, 8] {
        for (k, mu) in subdivision_chain(n_sub, 12).iter().enumerate() {
            assert_stage_invariants(mu);
            if k > 0 {
                assert!((mu.ft(&Vec2::zeros()).re - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn full_cycles_halve_the_support() {
    for n_sub in [2, 4, 16] {
        let chain = subdivision_chain(n_sub, 40);
        let mut i = 0;
        while i < chain.len() {
            let m = chain[i].arcs.len();
            let Some(later) = chain.get(i + m) else { break };
            assert!(
                later.support_length() <= 0.5 * chain[i].support_length() + 1e-9,
                "N = {n_sub}, stage {i}"
            );
            i += 1;
        }
    }
}

#[test]
fn full_cycles_spread_the_largest_mass() {
    // Mass moves into sub-bumps in proportion to the bump's cell masses, so after a full
    // cycle the heaviest arc carries at most the largest cell fraction of the old maximum.
    let n_sub = 8;
    let cells = rotacover::cantor::cell_masses(1.0, n_sub);
    let worst = cells.iter().cloned().fold(0.0, f64::max);
    let chain = subdivision_chain(n_sub, 30);
    for i in 0..chain.len() {
        let m = chain[i].arcs.len();
        let Some(later) = chain.get(i + m) else { break };
        let before = chain[i].arcs.iter().map(|a| a.mass).fold(0.0, f64::max);
        let after = later.arcs.iter().map(|a| a.mass).fold(0.0, f64::max);
        assert!(after <= worst * before + 1e-12, "stage {i}: {after} vs {worst}·{before}");
    }
}

#[test]
fn short_run_is_honest_and_detects_corruption() {
    let opts = CantorOpts::default();
    let rep = run_construction(CircleArc::new(0.0, 1.0).unwrap(), 4, &opts).unwrap();
    assert_eq!(rep.stages.len(), 4);
    assert!((rep.stages[0].epsilon_n - 3.0).abs() < 1e-12);
    for (i, s) in rep.stages.iter().enumerate() {
        assert_stage_invariants(&rep.stage_measure(i));
        assert!(s.r_n >= s.n as f64);
        if i > 0 {
            assert!(s.r_n >= rep.stages[i - 1].r_n);
            assert_eq!(s.arcs.len(), rep.stages[i - 1].arcs.len() - 1 + rep.stages[i - 1].refine.as_ref().unwrap().n_used);
        }
        if let Some(rf) = &s.refine {
            assert!(rf.sampled_diff <= 0.5 * rf.target);
        }
    }
    for w in rep.stages[2..].windows(2) {
        assert!(w[1].epsilon_n <= w[0].epsilon_n);
    }
    assert!(rep.envelope.passed);
    let fresh = envelope_check(&rep, opts.grid);
    assert!(fresh.passed, "{}", fresh.to_csv());
    let bad = corrupt_stage(&rep, 3);
    assert!(!envelope_check(&bad, opts.grid).passed);
}

#[test]
fn single_stage_report() {
    let rep = run_construction(CircleArc::new(0.0, 1.0).unwrap(), 1, &CantorOpts::default()).unwrap();
    assert_eq!(rep.stages.len(), 1);
    assert!((rep.stages[0].epsilon_n - 3.0).abs() < 1e-12);
    assert!(rep.envelope.passed);
}
