//! Crossbar of pulse-programmable conductances used as synaptic weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Measured conductance-versus-pulse tables.
///
/// `potentiation` must be non-decreasing and `depression` non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredCurve {
    pub potentiation: Vec<f64>,
    pub depression: Vec<f64>,
}

impl MeasuredCurve {
    pub fn validate(&self) -> Result<()> {
        if self.potentiation.len() < 2 || self.depression.len() < 2 {
            return Err(Error::InvalidInput("measured curve blocks need >= 2 points".into()));
        }
        let all = self.potentiation.iter().chain(&self.depression);
        if all.clone().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidInput("measured conductances must be finite and >= 0".into()));
        }
        if self.potentiation.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("potentiation block must be non-decreasing".into()));
        }
        if self.depression.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("depression block must be non-increasing".into()));
        }
        Ok(())
    }

    /// Conductance range spanned by the two blocks.
    pub fn range(&self) -> (f64, f64) {
        let all = self.potentiation.iter().chain(&self.depression);
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductanceUpdateModel {
    pub g_min: f64,
    pub g_max: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
    pub n_levels_hint: usize,
    pub measured_curve: Option<MeasuredCurve>,
}

impl Default for ConductanceUpdateModel {
    /// Synthetic exponential-saturation curve, about 60 usable levels.
    fn default() -> Self {
        ConductanceUpdateModel {
            g_min: 1e-6,
            g_max: 1e-4,
            alpha_p: 0.05,
            alpha_d: 0.05,
            n_levels_hint: 60,
            measured_curve: None,
        }
    }
}

impl ConductanceUpdateModel {
    /// Model that replays a measured curve; the range is taken from the table.
    pub fn from_curve(curve: MeasuredCurve) -> Result<Self> {
        curve.validate()?;
        let (g_min, g_max) = curve.range();
        if !(g_min < g_max) {
            return Err(Error::InvalidInput("measured curve spans no conductance range".into()));
        }
        Ok(ConductanceUpdateModel {
            g_min,
            g_max,
            n_levels_hint: curve.potentiation.len(),
            measured_curve: Some(curve),
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_min.is_finite() && self.g_max.is_finite() && self.g_min >= 0.0 && self.g_min < self.g_max) {
            return Err(Error::InvalidParams(format!("need 0 <= g_min < g_max, got [{}, {}]", self.g_min, self.g_max)));
        }
        for (name, a) in [("alpha_p", self.alpha_p), ("alpha_d", self.alpha_d)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1), got {a}")));
            }
        }
        if let Some(c) = &self.measured_curve {
            c.validate()?;
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.g_max - self.g_min
    }

    /// Largest change one potentiation pulse can make, as a weight fraction.
    pub fn quantum(&self) -> f64 {
        match &self.measured_curve {
            Some(c) => {
                let steps = c.potentiation.windows(2).chain(c.depression.windows(2));
                steps.map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / self.span()
            }
            None => self.alpha_p.max(self.alpha_d),
        }
    }

    /// Conductance after `n` potentiation pulses from `g`.
    pub fn potentiate(&self, g: f64, n: u32) -> f64 {
        let next = match &self.measured_curve {
            Some(c) => {
                let t = &c.potentiation;
                let k = t.iter().rposition(|&x| x <= g).unwrap_or(0);
                t[(k + n as usize).min(t.len() - 1)]
            }
            None => {
                let keep = math::powf(1.0 - self.alpha_p, n as f64);
                self.g_max - (self.g_max - g) * keep
            }
        };
        next.max(g).clamp(self.g_min, self.g_max)
    }

    /// Conductance after `n` depression pulses from `g`.
    pub fn depress(&self, g: f64, n: u32) -> f64 {
        let next = match &self.measured_curve {
            Some(c) => {
                let t = &c.depression;
                let k = t.iter().rposition(|&x| x >= g).unwrap_or(0);
                t[(k + n as usize).min(t.len() - 1)]
            }
            None => {
                let keep = math::powf(1.0 - self.alpha_d, n as f64);
                self.g_min + (g - self.g_min) * keep
            }
        };
        next.min(g).clamp(self.g_min, self.g_max)
    }
}

/// Result of a pulse update on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update {
    pub g: f64,
    /// The cell is dead; nothing was applied.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    g: Vec<f64>,
    functional: Vec<bool>,
    models: Vec<ConductanceUpdateModel>,
    model_of: Vec<usize>,
    skipped_updates: u64,
}

impl CrossbarArray {
    /// Every cell functional, sharing one update model, at `g_min`.
    pub fn uniform(rows: usize, cols: usize, model: ConductanceUpdateModel) -> Result<Self> {
        let n = rows * cols;
        Self::new(rows, cols, vec![true; n], vec![model], vec![0; n])
    }

    /// Cells start at `g_min`. `model_of` indexes into `models`; all
    /// models must share one conductance range.
    pub fn new(
        rows: usize,
        cols: usize,
        functional: Vec<bool>,
        models: Vec<ConductanceUpdateModel>,
        model_of: Vec<usize>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("crossbar needs rows, cols >= 1".into()));
        }
        let n = rows * cols;
        if functional.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: functional.len() });
        }
        if model_of.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: model_of.len() });
        }
        let first = models.first().ok_or_else(|| Error::InvalidInput("no update model".into()))?;
        for m in &models {
            m.validate()?;
            if m.g_min != first.g_min || m.g_max != first.g_max {
                return Err(Error::InvalidParams("update models must share g_min and g_max".into()));
            }
        }
        if model_of.iter().any(|&k| k >= models.len()) {
            return Err(Error::InvalidInput("model index out of range".into()));
        }
        Ok(CrossbarArray { rows, cols, g: vec![first.g_min; n], functional, models, model_of, skipped_updates: 0 })
    }

    /// Re-checks the construction invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let fresh = CrossbarArray::new(
            self.rows,
            self.cols,
            self.functional.clone(),
            self.models.clone(),
            self.model_of.clone(),
        )?;
        if self.g.len() != fresh.g.len() {
            return Err(Error::DimensionMismatch { expected: fresh.g.len(), got: self.g.len() });
        }
        if self.g.iter().any(|g| !(*g >= fresh.g_min() && *g <= fresh.g_max())) {
            return Err(Error::InvalidInput("conductance outside [g_min, g_max]".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn g_min(&self) -> f64 {
        self.models[0].g_min
    }

    pub fn g_max(&self) -> f64 {
        self.models[0].g_max
    }

    pub fn span(&self) -> f64 {
        self.models[0].span()
    }

    /// Row-major conductance matrix.
    pub fn conductances(&self) -> &[f64] {
        &self.g
    }

    pub fn functional_mask(&self) -> &[bool] {
        &self.functional
    }

    pub fn models(&self) -> &[ConductanceUpdateModel] {
        &self.models
    }

    /// Number of updates addressed to dead cells so far.
    pub fn skipped_updates(&self) -> u64 {
        self.skipped_updates
    }

    fn idx(&self, r: usize, c: usize) -> Result<usize> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::InvalidInput(format!("cell ({r}, {c}) outside {}x{} array", self.rows, self.cols)));
        }
        Ok(r * self.cols + c)
    }

    pub fn get(&self, r: usize, c: usize) -> Result<f64> {
        Ok(self.g[self.idx(r, c)?])
    }

    pub fn is_functional(&self, r: usize, c: usize) -> Result<bool> {
        Ok(self.functional[self.idx(r, c)?])
    }

    pub fn model(&self, r: usize, c: usize) -> Result<&ConductanceUpdateModel> {
        Ok(&self.models[self.model_of[self.idx(r, c)?]])
    }

    fn update(&mut self, r: usize, c: usize, f: impl Fn(&ConductanceUpdateModel, f64) -> f64) -> Result<Update> {
        let k = self.idx(r, c)?;
        if !self.functional[k] {
            self.skipped_updates += 1;
            return Ok(Update { g: self.g[k], skipped: true });
        }
        self.g[k] = f(&self.models[self.model_of[k]], self.g[k]);
        Ok(Update { g: self.g[k], skipped: false })
    }

    pub fn potentiate(&mut self, r: usize, c: usize, n_pulses: u32) -> Result<Update> {
        self.update(r, c, |m, g| m.potentiate(g, n_pulses))
    }

    pub fn depress(&mut self, r: usize, c: usize, n_pulses: u32) -> Result<Update> {
        self.update(r, c, |m, g| m.depress(g, n_pulses))
    }

    /// Full RESET of a cell back to `g_min`.
    pub fn reset_cell(&mut self, r: usize, c: usize) -> Result<Update> {
        self.update(r, c, |m, _| m.g_min)
    }

    /// Resets the cell and potentiates it to the reachable level nearest `target`.
    pub fn program(&mut self, r: usize, c: usize, target: f64) -> Result<Update> {
        self.update(r, c, |m, _| {
            let mut g = m.g_min;
            // bounded: a flat or saturated curve stops improving
            for _ in 0..100_000 {
                let next = m.potentiate(g, 1);
                if (next - target).abs() >= (g - target).abs() {
                    break;
                }
                g = next;
            }
            g
        })
    }

    /// Column currents `i[c] = Σ_r g[r,c]·v[r]`.
    pub fn read_mvm(&self, v_in: &[f64]) -> Result<Vec<f64>> {
        if v_in.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: v_in.len() });
        }
        let mut out = vec![0.0; self.cols];
        for (r, &v) in v_in.iter().enumerate() {
            let row = &self.g[r * self.cols..(r + 1) * self.cols];
            for (o, &g) in out.iter_mut().zip(row) {
                *o += g * v;
            }
        }
        Ok(out)
    }

    /// Signed weight read from a differential pair.
    pub fn read_weight(&self, pos: (usize, usize), neg: (usize, usize)) -> Result<f64> {
        Ok((self.get(pos.0, pos.1)? - self.get(neg.0, neg.1)?) / self.span())
    }

    /// Programs a differential pair to the canonical encoding of `w`.
    pub fn write_weight(&mut self, pos: (usize, usize), neg: (usize, usize), w: f64) -> Result<()> {
        let (gp, gn) = map_weight(w, self.g_min(), self.g_max())?;
        self.program(pos.0, pos.1, gp)?;
        self.program(neg.0, neg.1, gn)?;
        Ok(())
    }
}

/// Canonical differential-pair targets `(g⁺, g⁻)` for a signed weight:
/// the idle side of the pair sits at `g_min`.
pub fn map_weight(w: f64, g_min: f64, g_max: f64) -> Result<(f64, f64)> {
    if !(w.abs() <= 1.0) {
        return Err(Error::Domain { name: "w_signed", value: w, domain: "[-1, 1]" });
    }
    let span = g_max - g_min;
    Ok(if w >= 0.0 { (g_min + w * span, g_min) } else { (g_min, g_min - w * span) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> ConductanceUpdateModel {
        ConductanceUpdateModel::default()
    }

    #[test]
    fn single_pulse_closed_form() {
        let m = model();
        assert_relative_eq!(m.potentiate(m.g_min, 1), m.g_min + 0.05 * (m.g_max - m.g_min), max_relative = 1e-12);
        assert_relative_eq!(m.depress(m.g_max, 1), m.g_max - 0.05 * (m.g_max - m.g_min), max_relative = 1e-12);
    }

    #[test]
    fn saturates_at_bounds() {
        let m = model();
        assert_relative_eq!(m.potentiate(m.g_min, 2000), m.g_max, max_relative = 1e-9);
        assert_relative_eq!(m.depress(m.g_max, 2000), m.g_min, max_relative = 1e-9);
    }

    #[test]
    fn potentiation_curve_is_concave() {
        let m = model();
        let mut g = vec![m.g_min];
        for _ in 0..50 {
            g.push(m.potentiate(*g.last().unwrap(), 1));
        }
        let inc: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn potentiate_then_depress_is_asymmetric() {
        let m = ConductanceUpdateModel { alpha_p: 0.05, alpha_d: 0.05, ..model() };
        let g0 = m.g_min + 0.3 * m.span();
        let g1 = m.depress(m.potentiate(g0, 1), 1);
        // closed form: g0 + a(1-a)(g_max - g_min) - a(g0 - g_min) with a = 0.05
        let a = 0.05;
        let expect = g0 + a * (m.g_max - g0) - a * (g0 + a * (m.g_max - g0) - m.g_min);
        assert_relative_eq!(g1, expect, max_relative = 1e-12);
        assert!((g1 - g0).abs() > 1e-3 * m.span());
    }

    #[test]
    fn measured_curve_replays_exactly() {
        let curve = MeasuredCurve {
            potentiation: vec![1e-6, 2e-6, 5e-6, 9e-6, 1e-5],
            depression: vec![1e-5, 7e-6, 3e-6, 1.5e-6, 1e-6],
        };
        let m = ConductanceUpdateModel::from_curve(curve.clone()).unwrap();
        let mut g = m.g_min;
        for &want in &curve.potentiation[1..] {
            g = m.potentiate(g, 1);
            assert_eq!(g, want);
        }
        assert_eq!(m.potentiate(g, 3), 1e-5);
        for &want in &curve.depression[1..] {
            g = m.depress(g, 1);
            assert_eq!(g, want);
        }
        let bad = MeasuredCurve { potentiation: vec![2e-6, 1e-6], depression: vec![2e-6, 1e-6] };
        assert!(ConductanceUpdateModel::from_curve(bad).is_err());
    }

    #[test]
    fn dead_cells_are_frozen() {
        let mut a = CrossbarArray::new(1, 2, vec![true, false], vec![model()], vec![0, 0]).unwrap();
        let u = a.potentiate(0, 1, 10).unwrap();
        assert!(u.skipped);
        assert_eq!(u.g, a.g_min());
        assert_eq!(a.skipped_updates(), 1);
        assert!(!a.potentiate(0, 0, 1).unwrap().skipped);
    }

    #[test]
    fn mvm_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = CrossbarArray::uniform(8, 8, model()).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                a.potentiate(r, c, rng.random_range(0..60)).unwrap();
            }
        }
        let v: Vec<f64> = (0..8).map(|_| rng.random_range(-0.2..0.2)).collect();
        let got = a.read_mvm(&v).unwrap();
        for (c, g) in got.iter().enumerate() {
            let want: f64 = v.iter().enumerate().map(|(r, x)| a.get(r, c).unwrap() * x).sum();
            assert_relative_eq!(*g, want, max_relative = 1e-12);
        }
        assert_eq!(a.read_mvm(&[0.0; 8]).unwrap(), vec![0.0; 8]);
        let mut e = vec![0.0; 8];
        e[3] = 0.5;
        let row = a.read_mvm(&e).unwrap();
        for (c, x) in row.iter().enumerate() {
            assert_eq!(*x, 0.5 * a.get(3, c).unwrap());
        }
        assert!(matches!(a.read_mvm(&[0.0; 7]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weight_mapping_canonical_form() {
        let m = model();
        assert_eq!(map_weight(0.0, m.g_min, m.g_max).unwrap(), (m.g_min, m.g_min));
        assert_eq!(map_weight(1.0, m.g_min, m.g_max).unwrap(), (m.g_max, m.g_min));
        assert_eq!(map_weight(-1.0, m.g_min, m.g_max).unwrap(), (m.g_min, m.g_max));
        assert!(map_weight(1.5, m.g_min, m.g_max).is_err());
    }

    proptest! {
        #[test]
        fn conductance_bounds_and_monotone(ops in prop::collection::vec((any::<bool>(), 0u32..80), 1..60)) {
            let m = model();
            let mut g = m.g_min;
            for (up, n) in ops {
                let next = if up { m.potentiate(g, n) } else { m.depress(g, n) };
                prop_assert!(next >= m.g_min && next <= m.g_max);
                if up { prop_assert!(next >= g) } else { prop_assert!(next <= g) }
                g = next;
            }
        }

        #[test]
        fn weight_round_trip_within_quantum(w in -1.0f64..=1.0) {
            let mut a = CrossbarArray::uniform(1, 2, model()).unwrap();
            a.write_weight((0, 0), (0, 1), w).unwrap();
            let back = a.read_weight((0, 0), (0, 1)).unwrap();
            prop_assert!((back - w).abs() <= a.models()[0].quantum(), "{w} -> {back}");
            let (gp, gn) = (a.get(0, 0).unwrap(), a.get(0, 1).unwrap());
            let mid = a.g_min() + 0.5 * a.span();
            prop_assert!(!(gp > mid && gn > mid));
        }

        #[test]
        fn mvm_is_linear(x in prop::collection::vec(-1.0f64..1.0, 4), y in prop::collection::vec(-1.0f64..1.0, 4),
                         s in -3.0f64..3.0, t in -3.0f64..3.0, pulses in prop::collection::vec(0u32..40, 12)) {
            let mut a = CrossbarArray::uniform(4, 3, model()).unwrap();
            for (k, n) in pulses.into_iter().enumerate() {
                a.potentiate(k / 3, k % 3, n).unwrap();
            }
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + t * b).collect();
            let lhs = a.read_mvm(&mix).unwrap();
            let (ix, iy) = (a.read_mvm(&x).unwrap(), a.read_mvm(&y).unwrap());
            for c in 0..3 {
                let rhs = s * ix[c] + t * iy[c];
                prop_assert!((lhs[c] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * a.g_max());
            }
        }
    }
}
