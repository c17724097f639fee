//! Spectral post-processing: Welch power spectral densities of position
//! traces and photocurrents, and single-peak Lorentzian fits.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::Result;

/// Uniformly sampled real-valued trace.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, values: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConfigInvalid(
                "time series contains non-finite values".into(),
            ));
        }
        Ok(Self {
            sample_rate,
            values,
        })
    }

    pub fn variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64
    }
}

/// Welch average periodogram: Hann window, mean detrend per segment,
/// one-sided, normalized so that `Σ PSD·Δf ≈ variance`.
///
/// `overlap` is the segment overlap fraction in `[0, 1)`; 0.5 is the default
/// choice everywhere in this crate.
pub fn welch_psd(
    ts: &TimeSeries,
    segment_length: usize,
    overlap: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = segment_length;
    if n > ts.values.len() {
        return Err(Error::SegmentTooLong {
            segment: n,
            len: ts.values.len(),
        });
    }
    if n < 8 {
        return Err(Error::ConfigInvalid(format!(
            "segment length {n} too short for a windowed periodogram"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::ConfigInvalid(format!(
            "overlap fraction {overlap} outside [0, 1)"
        )));
    }
    let hop = ((n as f64) * (1.0 - overlap)).round().max(1.0) as usize;

    // periodic Hann window and its power normalization
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let n_bins = n / 2 + 1;
    let mut psd = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + n <= ts.values.len() {
        let seg = &ts.values[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for (i, (v, w)) in seg.iter().zip(&window).enumerate() {
            buf[i] = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, acc) in psd.iter_mut().enumerate() {
            // one-sided: interior bins carry both ±k
            let fold = if k == 0 || (n % 2 == 0 && k == n / 2) {
                1.0
            } else {
                2.0
            };
            *acc += fold * buf[k].norm_sqr() / (ts.sample_rate * win_power);
        }
        segments += 1;
        start += hop;
    }
    for v in &mut psd {
        *v /= segments as f64;
    }
    let freqs = (0..n_bins)
        .map(|k| k as f64 * ts.sample_rate / n as f64)
        .collect();
    Ok((freqs, psd))
}

/// Single-peak fit result. Frequencies are in Hz; `linewidth` is the damping
/// rate γ of the fitted kernel divided by 2π.
#[derive(Debug, Clone)]
pub struct SpectrumFit {
    pub center: f64,
    pub linewidth: f64,
    pub plateau: f64,
    pub amplitude: f64,
    /// RMS of the fit residual relative to the RMS of the data in the
    /// window; the convergence diagnostic reported alongside the parameters.
    pub residual: f64,
}

/// Least-squares fit of `A/((ω²−ω₀²)² + γ²ω²) + floor` over the frequency
/// window `(f_lo, f_hi)`, minimized with a Nelder–Mead simplex.
pub fn lorentzian_fit(
    frequencies: &[f64],
    psd: &[f64],
    window: (f64, f64),
) -> Result<SpectrumFit> {
    if frequencies.len() != psd.len() {
        return Err(Error::DimensionMismatch {
            expected: frequencies.len(),
            got: psd.len(),
        });
    }
    let pts: Vec<(f64, f64)> = frequencies
        .iter()
        .zip(psd)
        .filter(|(f, s)| **f >= window.0 && **f <= window.1 && s.is_finite())
        .map(|(f, s)| (2.0 * std::f64::consts::PI * f, *s))
        .collect();
    if pts.len() < 8 {
        return Err(Error::FitDiverged(format!(
            "only {} samples inside the fit window",
            pts.len()
        )));
    }

    // peak prominence gate: a flat spectrum has no resolvable linewidth
    let mut sorted: Vec<f64> = pts.iter().map(|p| p.1).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let (omega_pk, s_pk) = pts
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    if !(s_pk > 2.0 * median) || median < 0.0 {
        return Err(Error::FitDiverged(
            "no peak rises above the surrounding floor".into(),
        ));
    }

    // initial guesses from the data
    let floor0 = sorted[sorted.len() / 10].max(0.0);
    let half = floor0 + 0.5 * (s_pk - floor0);
    let mut gamma0 = 0.0;
    for w in pts.windows(2) {
        let above0 = w[0].1 >= half;
        let above1 = w[1].1 >= half;
        if above0 != above1 {
            gamma0 += (w[1].0 - w[0].0).abs();
        }
    }
    if gamma0 <= 0.0 {
        gamma0 = 0.05 * omega_pk.max(pts[1].0 - pts[0].0);
    }
    let a0 = (s_pk - floor0) * gamma0 * gamma0 * omega_pk * omega_pk;
    let scale2: f64 = pts.iter().map(|p| p.1 * p.1).sum::<f64>() / pts.len() as f64;

    let cost = |p: &[f64; 4]| -> f64 {
        let (w0, g, a, fl) = (p[0], p[1], p[2], p[3]);
        if !(w0 > 0.0) || !(g > 0.0) || !(a > 0.0) || fl < 0.0 {
            return f64::INFINITY;
        }
        pts.iter()
            .map(|(w, s)| {
                let d = (w * w - w0 * w0).powi(2) + g * g * w * w;
                let m = a / d + fl;
                (m - s).powi(2) / scale2
            })
            .sum::<f64>()
    };

    let p0 = [omega_pk, gamma0, a0, floor0.max(1e-12 * s_pk)];
    let best = nelder_mead(&cost, p0, 4_000);
    let res = cost(&best);
    if !res.is_finite() || !(best[1] > 0.0) {
        return Err(Error::FitDiverged(
            "simplex failed to converge to a positive linewidth".into(),
        ));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(SpectrumFit {
        center: best[0] / two_pi,
        linewidth: best[1] / two_pi,
        plateau: best[3],
        amplitude: best[2],
        residual: (res / pts.len() as f64).sqrt(),
    })
}

/// Plain Nelder–Mead on 4 parameters with standard coefficients.
fn nelder_mead(cost: &dyn Fn(&[f64; 4]) -> f64, p0: [f64; 4], max_iter: usize) -> [f64; 4] {
    const N: usize = 4;
    let mut simplex: Vec<[f64; 4]> = vec![p0];
    for i in 0..N {
        let mut p = p0;
        p[i] *= 1.05;
        if p[i] == p0[i] {
            p[i] = p0[i] + 1e-6;
        }
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| cost(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=N).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[N];
        let second_worst = order[N - 1];
        if values[worst] - values[best] < 1e-14 * (1.0 + values[best].abs()) {
            break;
        }

        let mut centroid = [0.0; 4];
        for (idx, p) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for j in 0..N {
                centroid[j] += p[j] / N as f64;
            }
        }
        let combine = |t: f64| -> [f64; 4] {
            let mut p = [0.0; 4];
            for j in 0..N {
                p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            }
            p
        };

        let reflected = combine(-1.0);
        let fr = cost(&reflected);
        if fr < values[best] {
            let expanded = combine(-2.0);
            let fe = cost(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] {
                combine(-0.5)
            } else {
                combine(0.5)
            };
            let fc = cost(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[best];
                for (idx, p) in simplex.iter_mut().enumerate() {
                    if idx == best {
                        continue;
                    }
                    for j in 0..N {
                        p[j] = anchor[j] + 0.5 * (p[j] - anchor[j]);
                    }
                    values[idx] = cost(p);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..=N).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    simplex[order[0]]
}
