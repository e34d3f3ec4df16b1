//! OQAM filter-bank multicarrier.
//!
//! Pulse amplitude `a[r][n]` on row `r` and subcarrier `n` is transmitted as
//! `a·e^{jφ(r,n)}·g[k − r·N/2]·e^{j2πn(k − r·N/2 − c)/N}` where
//! `c = (K·N − 1)/2` is the prototype centre. Referencing the carrier phase
//! to the pulse centre keeps the pulses orthogonal in the real domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filtered::prototype::PrototypeFilter;
use crate::gridding::{oqam_destagger, OqamGrid, ResourceGrid};
use crate::numerics::{fft, ifft, IqVec};
use crate::windowed::Numerology;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check(num: &Numerology, proto: &PrototypeFilter) -> Result<usize> {
    num.validate()?;
    let n = num.n;
    if n % 2 != 0 {
        return Err(Error::ProtoGridMismatch(format!("half-symbol stride needs even N, got {n}")));
    }
    if proto.len() != proto.overlap() * n {
        return Err(Error::ProtoGridMismatch(format!(
            "prototype length {} is not K·N = {}·{n}",
            proto.len(),
            proto.overlap()
        )));
    }
    Ok(proto.len())
}

/// Burst length for `m` QAM symbols: `(2m − 1)·N/2 + K·N`.
pub fn fbmc_burst_len(num: &Numerology, proto: &PrototypeFilter) -> usize {
    (2 * num.m - 1) * num.n / 2 + proto.len()
}

/// Per-carrier rotation `e^{∓j2πnc/N}` caused by centring the carrier phase.
fn centre_rotation(n: usize, len: usize, sign: f64) -> Vec<Complex64> {
    let c = (len as f64 - 1.0) / 2.0;
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 * c / n as f64))
        .collect()
}

pub fn mod_fbmc_oqam(og: &OqamGrid, num: &Numerology, proto: &PrototypeFilter) -> Result<IqVec> {
    let len = check(num, proto)?;
    let n = num.n;
    if og.rows() != 2 * num.m || og.subcarriers() != n {
        return Err(Error::ProtoGridMismatch(format!(
            "OQAM grid {}x{} does not match 2M x N = {}x{n}",
            og.rows(),
            og.subcarriers(),
            2 * num.m
        )));
    }
    let rot = centre_rotation(n, len, -1.0);
    let g = proto.taps();
    let mut out = vec![ZERO; fbmc_burst_len(num, proto)];
    let mut coeffs = vec![ZERO; n];
    for r in 0..og.rows() {
        coeffs.iter_mut().for_each(|c| *c = ZERO);
        let mut any = false;
        for &k in og.active() {
            let a = og.get(r, k);
            if a != 0.0 {
                coeffs[k] = a * OqamGrid::phase(r, k) * rot[k];
                any = true;
            }
        }
        if !any {
            continue;
        }
        // Σ_n b_n e^{j2πnl/N} = N · IDFT(b)[l mod N]
        let period: Vec<Complex64> = ifft(&coeffs).into_iter().map(|v| v * n as f64).collect();
        let start = r * n / 2;
        for (l, &gl) in g.iter().enumerate() {
            out[start + l] += period[l % n] * gl;
        }
    }
    Ok(IqVec::from_raw(out))
}

/// Matched-filter analysis returning the complex, derotated output of every
/// row and subcarrier before the real part is taken. Its imaginary part is
/// the intrinsic interference of neighbouring pulses.
pub fn fbmc_analysis(rx: &[Complex64], num: &Numerology, proto: &PrototypeFilter) -> Result<Vec<Vec<Complex64>>> {
    let len = check(num, proto)?;
    let n = num.n;
    let needed = fbmc_burst_len(num, proto);
    if rx.len() < needed {
        return Err(Error::TruncatedBurst { needed, got: rx.len() });
    }
    let rot = centre_rotation(n, len, 1.0);
    let g = proto.taps();
    let mut rows = Vec::with_capacity(2 * num.m);
    let mut folded = vec![ZERO; n];
    for r in 0..2 * num.m {
        folded.iter_mut().for_each(|c| *c = ZERO);
        let start = r * n / 2;
        for (l, &gl) in g.iter().enumerate() {
            folded[l % n] += rx[start + l] * gl;
        }
        let spec = fft(&folded);
        rows.push(
            (0..n)
                .map(|k| spec[k] * rot[k] * OqamGrid::phase(r, k).conj())
                .collect(),
        );
    }
    Ok(rows)
}

/// Matched filtering, derotation, real part and destaggering.
pub fn demod_fbmc_oqam(rx: &[Complex64], num: &Numerology, proto: &PrototypeFilter) -> Result<ResourceGrid> {
    let rows = fbmc_analysis(rx, num, proto)?;
    let mut og = OqamGrid::zeros(2 * num.m, num.n, num.active.clone());
    for (r, row) in rows.iter().enumerate() {
        for &k in &num.active {
            og.set(r, k, row[k].re);
        }
    }
    Ok(oqam_destagger(&og))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::prototype::design_phydyas;
    use crate::gridding::{oqam_stagger, Constellation};
    use crate::metrics::evm_db;
    use proptest::prelude::*;

    fn setup(n: usize, m: usize, active: usize) -> (Numerology, PrototypeFilter) {
        let num = Numerology::new(n, 0, 0, m, Numerology::centered_active(n, active)).unwrap();
        (num, design_phydyas(n, 4).unwrap())
    }

    #[test]
    fn single_pulse_is_prototype() {
        let (num, p) = setup(64, 2, 64);
        let mut og = OqamGrid::zeros(4, 64, num.active.clone());
        og.set(0, 0, 1.0);
        let s = mod_fbmc_oqam(&og, &num, &p).unwrap();
        for (i, &t) in p.taps().iter().enumerate() {
            assert!((s[i] - Complex64::new(t, 0.0)).norm() < 1e-12);
        }
        assert!(s[p.len()..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn zero_grid_zero_signal() {
        let (num, p) = setup(32, 3, 20);
        let og = OqamGrid::zeros(6, 32, num.active.clone());
        let s = mod_fbmc_oqam(&og, &num, &p).unwrap();
        assert_eq!(s.len(), 5 * 16 + 128);
        assert!(s.iter().all(|v| *v == ZERO));
        let g = demod_fbmc_oqam(&s, &num, &p).unwrap();
        assert!(g.active_values().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn loopback_near_perfect_reconstruction() {
        for (n, m, a) in [(64, 16, 64), (256, 20, 120)] {
            let (num, p) = setup(n, m, a);
            let (grid, _) = ResourceGrid::random(m, n, num.active.clone(), &Constellation::qpsk(), 5).unwrap();
            let s = mod_fbmc_oqam(&oqam_stagger(&grid), &num, &p).unwrap();
            let rx = demod_fbmc_oqam(&s, &num, &p).unwrap();
            let evm = evm_db(&grid.active_values(), &rx.active_values());
            assert!(evm <= -50.0, "N={n}: {evm}");
        }
    }

    #[test]
    fn intrinsic_interference_is_imaginary() {
        let (num, p) = setup(64, 8, 64);
        let (grid, _) = ResourceGrid::random(8, 64, num.active.clone(), &Constellation::qpsk(), 2).unwrap();
        let s = mod_fbmc_oqam(&oqam_stagger(&grid), &num, &p).unwrap();
        let rows = fbmc_analysis(&s, &num, &p).unwrap();
        let imag: f64 = rows.iter().flatten().map(|v| v.im * v.im).sum::<f64>();
        let real: f64 = rows.iter().flatten().map(|v| v.re * v.re).sum::<f64>();
        assert!(imag > 0.1 * real);
    }

    #[test]
    fn mismatched_prototype_rejected() {
        let (num, _) = setup(64, 2, 10);
        let p = design_phydyas(32, 4).unwrap();
        let og = OqamGrid::zeros(4, 64, num.active.clone());
        assert!(matches!(mod_fbmc_oqam(&og, &num, &p), Err(Error::ProtoGridMismatch(_))));
        assert!(matches!(
            demod_fbmc_oqam(&[ZERO; 10], &num, &design_phydyas(64, 4).unwrap()),
            Err(Error::TruncatedBurst { .. })
        ));
    }

    #[test]
    fn rect_prototype_reduces_to_ofdm_like_symbols() {
        // K = 1 rectangle: row 0 is a plain N-sample multicarrier symbol.
        let num = Numerology::new(16, 0, 0, 1, (0..16).collect()).unwrap();
        let p = PrototypeFilter::rect(16);
        let mut og = OqamGrid::zeros(2, 16, num.active.clone());
        og.set(0, 3, 1.0);
        let s = mod_fbmc_oqam(&og, &num, &p).unwrap();
        let mags: Vec<f64> = s[..16].iter().map(|v| v.norm()).collect();
        assert!(mags.iter().all(|&m| (m - 0.25).abs() < 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn synthesis_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let (num, p) = setup(16, 3, 12);
            let q = Constellation::qpsk();
            let (g1, _) = ResourceGrid::random(3, 16, num.active.clone(), &q, seed).unwrap();
            let (g2, _) = ResourceGrid::random(3, 16, num.active.clone(), &q, seed ^ 1).unwrap();
            let (o1, o2) = (oqam_stagger(&g1), oqam_stagger(&g2));
            let s1 = mod_fbmc_oqam(&o1, &num, &p).unwrap();
            let s2 = mod_fbmc_oqam(&o2, &num, &p).unwrap();
            let s = mod_fbmc_oqam(&o1.linear_combination(a, &o2, b), &num, &p).unwrap();
            for i in 0..s.len() {
                prop_assert!((s[i] - (s1[i] * a + s2[i] * b)).norm() < 1e-12);
            }
        }
    }
}
