use padic_sea::ensembles::sample_haar_gl;
use padic_sea::padic::smith_sn;
use padic_sea::qcalc::{coker_single_box_prob, coker_unit_prob, rat, single_box_bounds, to_f64, two_jump_bound_corrected};
use padic_sea::rng::RngHandle;

fn z(hits: u64, n: u64, p: f64) -> f64 {
    (hits as f64 / n as f64 - p) / (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn unit_cokernel_matches_monte_carlo() {
    let runs = 40_000u64;
    for (g, &(big_n, n, m, p)) in [(4u64, 2u64, 3u64, 2u64), (4, 2, 2, 2), (3, 1, 2, 3), (5, 2, 4, 2)].iter().enumerate() {
        let t = rat(1, p as i64);
        let (mut unit, mut corank_one) = (0, 0);
        for k in 0..runs {
            let a = sample_haar_gl(big_n as usize, p, 6, &mut RngHandle::new(40 + g as u64, k).rng()).unwrap();
            let rows: Vec<usize> = (0..n as usize).collect();
            let cols: Vec<usize> = (0..m as usize).collect();
            let sn = smith_sn(&a.select(&rows, &cols)).parts;
            let nonzero = sn.iter().filter(|&&x| x > 0).count();
            corank_one += (nonzero == 1) as u64;
            unit += (nonzero == 1 && sn.contains(&1)) as u64;
        }
        let exact = to_f64(&coker_unit_prob(big_n, n, m, &t).unwrap());
        let literal = to_f64(&coker_single_box_prob(big_n, n, m, &t).unwrap());
        assert!(z(unit, runs, exact).abs() < 4.0, "({big_n},{n},{m},{p}) unit {unit} vs {exact}");
        assert!(z(corank_one, runs, literal).abs() < 4.0, "({big_n},{n},{m},{p}) corank one {corank_one} vs {literal}");
    }
}

#[test]
fn corrected_bounds_hold_with_large_lambda() {
    // nu = SN(diag(p^lambda) A diag(p^mu)) with a part of lambda above 1.
    use padic_sea::padic::{matmul, MatModPd};
    let (p, d) = (2u64, 5u32);
    let mu = [3u32, 2, 1, 0];
    let runs = 40_000u64;
    let t = rat(1, 2);
    for lambda in [[2u32, 0, 0, 0], [3, 0, 0, 0]] {
        let dl = MatModPd::diag_powers(p, d, &lambda).unwrap();
        let dm = MatModPd::diag_powers(p, d, &mu).unwrap();
        let (mut single, mut two) = (0u64, 0u64);
        for k in 0..runs {
            let a = sample_haar_gl(4, p, d, &mut RngHandle::new(50 + lambda[0] as u64, k).rng()).unwrap();
            let nu = smith_sn(&matmul(&matmul(&dl, &a).unwrap(), &dm).unwrap()).parts;
            single += (nu[2] == 2 && nu[3] == 0) as u64;
            two += (nu[2] + nu[3] >= 3) as u64;
        }
        let b = single_box_bounds(3, 4, 1, 1, &t).unwrap();
        let (lo, hi) = (to_f64(&b.lower), to_f64(&b.upper));
        let bound = to_f64(&two_jump_bound_corrected(3, 4, 1, &t).unwrap());
        assert!(z(single, runs, lo) > -4.0 && z(single, runs, hi) < 4.0, "single {single}");
        assert!(two > 0 && z(two, runs, bound) < 4.0, "two {two} vs {bound}");
    }
}
