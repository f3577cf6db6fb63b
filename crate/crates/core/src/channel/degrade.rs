use super::BmsChannel;

/// Slack allowed when comparing the two sides of the degradation criterion.
pub const DEGRADATION_TOLERANCE: f64 = 1e-9;

/// Returns true iff `a` is degraded with respect to `b`.
///
/// For BMS channels in D-representation, `a` is a stochastic post-processing
/// of `b` exactly when `E_a[(X - z)^+] <= E_b[(X - z)^+]` for every
/// `z in [0, 1]`. Both sides are piecewise linear in `z` with kinks only at
/// atom locations, so checking the breakpoints decides the question exactly.
pub fn degradation_check(a: &BmsChannel, b: &BmsChannel) -> bool {
    let mut points: Vec<f64> = a
        .atoms()
        .iter()
        .chain(b.atoms())
        .map(|at| at.x)
        .chain([0.0, 1.0])
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let ea = hinge_profile(a, &points);
    let eb = hinge_profile(b, &points);
    ea.iter()
        .zip(&eb)
        .all(|(x, y)| *x <= *y + DEGRADATION_TOLERANCE)
}

/// `E[(X - z)^+]` at each sorted `z`, using running tail sums.
fn hinge_profile(ch: &BmsChannel, zs: &[f64]) -> Vec<f64> {
    let atoms = ch.atoms();
    // tail_p[i] = sum p over atoms i.., tail_px likewise for p * x.
    let mut tail_p = vec![0.0; atoms.len() + 1];
    let mut tail_px = vec![0.0; atoms.len() + 1];
    for i in (0..atoms.len()).rev() {
        tail_p[i] = tail_p[i + 1] + atoms[i].p;
        tail_px[i] = tail_px[i + 1] + atoms[i].p * atoms[i].x;
    }
    let mut first = 0;
    zs.iter()
        .map(|&z| {
            while first < atoms.len() && atoms[first].x <= z {
                first += 1;
            }
            (tail_px[first] - z * tail_p[first]).max(0.0)
        })
        .collect()
}
