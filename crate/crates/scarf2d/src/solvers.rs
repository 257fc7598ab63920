//! Construction of the analytic wave functions and spectra of both
//! solvable branches: the separable branch at negative integer coupling
//! a = -k, and the zero-mode branch at a > -1/2 with its triangular
//! closure matrix and double chains of intertwining operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Axis, Jet};
use crate::operators2d::{
    hamiltonian, supercharge, Branch, ChargeKind, Domain, HamKind, Symmetry, WaveFunction, WaveMeta,
};
use crate::scarf1d::{eigenfunction, eigenvalue, ModelParams};

/// Bound on m + M in chain construction; keeps jet orders at desk scale.
pub const DEFAULT_MAX_CHAIN_DEPTH: usize = 4;

/// One discrete level of either branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub branch: Branch,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_m: Option<usize>,
    pub energy: f64,
    pub params: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalizable: Option<bool>,
    pub degenerate: bool,
}

/// Separable eigenstate of the a = -1 partner:
/// eta_n(x1) eta_m(x2) +- eta_m(x1) eta_n(x2), energy eps_n + eps_m.
pub fn separable_state(n: usize, m: usize, parity: Parity, b: f64, c: f64) -> Result<WaveFunction> {
    if (n as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n, b });
    }
    if (m as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n: m, b });
    }
    if parity == Parity::Minus && n == m {
        return Err(Error::DegenerateAntisymmetric { n });
    }
    let eta_n = eigenfunction(n, b, c)?;
    let eta_m = eigenfunction(m, b, c)?;
    let sign = match parity {
        Parity::Plus => 1.0,
        Parity::Minus => -1.0,
    };
    let energy = eigenvalue(n, b)? + eigenvalue(m, b)?;
    let meta = WaveMeta {
        label: format!("sep{}({n},{m};b={b},c={c})", parity.symbol()),
        params: ModelParams::new(-1.0, b, c).ok(),
        n: Some(n),
        m: Some(m),
        big_m: None,
        branch: Some(Branch::Exact),
        symmetry: if sign > 0.0 { Symmetry::Symmetric } else { Symmetry::Antisymmetric },
        domain: Domain::FullPlane,
        energy: Some(energy),
    };
    Ok(WaveFunction::from_fn(meta, move |pt, k| {
        let a1 = Jet::from_taylor1(&eta_n.eval(pt.0, k), Axis::X1, pt, k);
        let a2 = Jet::from_taylor1(&eta_m.eval(pt.1, k), Axis::X2, pt, k);
        let b1 = Jet::from_taylor1(&eta_m.eval(pt.0, k), Axis::X1, pt, k);
        let b2 = Jet::from_taylor1(&eta_n.eval(pt.1, k), Axis::X2, pt, k);
        Ok(a1.mul(&a2).add(&b1.mul(&b2).scale(sign)))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    fn symbol(&self) -> &'static str {
        match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        }
    }
}

/// Bound state of the negative-integer branch, built by the chain
/// Q+(-k) ... Q+(-1) acting on the antisymmetric separable state. Requires
/// the selection rule |n - m| > k; parity under x1 <-> x2 alternates with k
/// because each charge anticommutes with the coordinate swap.
pub fn exact_branch_state(k: usize, n: usize, m: usize, p: &ModelParams) -> Result<WaveFunction> {
    if k == 0 || p.a() != -(k as f64) {
        return Err(Error::InvalidParams(format!(
            "exact branch requires a = -k with k >= 1 (got a = {}, k = {k})",
            p.a()
        )));
    }
    let (b, c) = (p.b(), p.c());
    if (n as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n, b });
    }
    if (m as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n: m, b });
    }
    if n.abs_diff(m) <= k {
        return Err(Error::SelectionRuleViolated { n, m, k });
    }
    let mut psi = separable_state(n, m, Parity::Minus, b, c)?;
    for j in 1..=k {
        let q = supercharge(ChargeKind::QPlus, &p.shift_a(k as f64 - j as f64));
        psi = WaveFunction::applied(&q, &psi);
    }
    let energy = eigenvalue(n, b)? + eigenvalue(m, b)?;
    psi.meta = WaveMeta {
        label: format!("exact({n},{m};k={k},b={b},c={c})"),
        params: Some(*p),
        n: Some(n),
        m: Some(m),
        big_m: None,
        branch: Some(Branch::Exact),
        symmetry: if k % 2 == 1 { Symmetry::Symmetric } else { Symmetry::Antisymmetric },
        domain: Domain::OffDiagonal,
        energy: Some(energy),
    };
    Ok(psi)
}

/// Discrete spectrum of the negative-integer branch: one entry per
/// unordered pair {n, m} with |n - m| > k, sorted by energy.
pub fn exact_branch_spectrum(k: usize, b: f64, c: f64, n_max: usize) -> Vec<SpectrumEntry> {
    let params = ModelParams::with_integer_b(-(k as f64), b, c).expect("positive b, c");
    let mut out = Vec::new();
    for n in 0..=n_max {
        for m in (n + 1)..=n_max {
            if (n as f64) >= b || (m as f64) >= b || m - n <= k {
                continue;
            }
            let energy = -(b - n as f64).powi(2) - (b - m as f64).powi(2);
            out.push(SpectrumEntry {
                branch: Branch::Exact,
                n,
                m,
                big_m: None,
                energy,
                params,
                normalizable: None,
                degenerate: false,
            });
        }
    }
    out.sort_by(|x, y| x.energy.total_cmp(&y.energy).then(x.n.cmp(&y.n)).then(x.m.cmp(&y.m)));
    flag_degenerate(&mut out);
    out
}

fn flag_degenerate(entries: &mut [SpectrumEntry]) {
    for i in 0..entries.len() {
        for j in 0..entries.len() {
            if i != j {
                let (ei, ej) = (entries[i].energy, entries[j].energy);
                if (ei - ej).abs() <= 1e-10 * ei.abs().max(1.0) {
                    entries[i].degenerate = true;
                }
            }
        }
    }
}

/// The similarity factor |cosh(x+/2) sinh(x-/2)|^a as a jet source. Even in
/// x- and therefore symmetric; undefined on the line x1 = x2.
pub fn gauge_factor(p: &ModelParams) -> WaveFunction {
    let a = p.a();
    let meta = WaveMeta {
        label: format!("gauge(a={a})"),
        params: Some(*p),
        n: None,
        m: None,
        big_m: None,
        branch: Some(Branch::Quasi),
        symmetry: Symmetry::Symmetric,
        domain: Domain::OffDiagonal,
        energy: None,
    };
    WaveFunction::from_fn(meta, move |pt, k| {
        let xp = Jet::variable(pt, Axis::X1, k).add(&Jet::variable(pt, Axis::X2, k)).scale(0.5);
        let xm = Jet::variable(pt, Axis::X1, k).sub(&Jet::variable(pt, Axis::X2, k)).scale(0.5);
        xp.cosh().mul(&xm.sinh()).signed_powf(a)
    })
}

/// Zero mode of the lowering supercharge:
/// Omega_n = |cosh(x+/2) sinh(x-/2)|^a eta_n(x1) eta_n(x2).
pub fn zero_mode(n: usize, p: &ModelParams) -> Result<WaveFunction> {
    let (b, c) = (p.b(), p.c());
    if (n as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n, b });
    }
    let eta = eigenfunction(n, b, c)?;
    let gauge = gauge_factor(p);
    let meta = WaveMeta {
        label: format!("Omega{n}(a={},b={b},c={c})", p.a()),
        params: Some(*p),
        n: Some(n),
        m: None,
        big_m: None,
        branch: Some(Branch::Quasi),
        symmetry: Symmetry::Symmetric,
        domain: Domain::OffDiagonal,
        energy: None,
    };
    Ok(WaveFunction::from_fn(meta, move |pt, k| {
        let g = gauge.jet_at(pt, k)?;
        let f1 = Jet::from_taylor1(&eta.eval(pt.0, k), Axis::X1, pt, k);
        let f2 = Jet::from_taylor1(&eta.eval(pt.1, k), Axis::X2, pt, k);
        Ok(g.mul(&f1).mul(&f2))
    }))
}

/// Collocation sampling for the closure-matrix fit: low-discrepancy points
/// in a box with the diagonal strip removed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollocationConfig {
    pub points: usize,
    pub half_width: f64,
    pub min_offdiag: f64,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig { points: 400, half_width: 4.0, min_offdiag: 0.3 }
    }
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

pub(crate) fn collocation_points(cfg: &CollocationConfig) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(cfg.points);
    let mut i = 1;
    while pts.len() < cfg.points {
        let x1 = cfg.half_width * (2.0 * halton(i, 2) - 1.0);
        let x2 = cfg.half_width * (2.0 * halton(i, 3) - 1.0);
        i += 1;
        if (x1 - x2).abs() > cfg.min_offdiag {
            pts.push((x1, x2));
        }
    }
    pts
}

/// Matrix of the Hamiltonian restricted to the zero-mode span:
/// H Omega_n = sum_k entries[n][k] Omega_k. Triangular, with the discrete
/// energies on the diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CMatrix {
    pub size: usize,
    pub entries: Vec<Vec<f64>>,
    pub fit_residual: f64,
    pub condition: f64,
    pub params: ModelParams,
}

impl CMatrix {
    pub fn diagonal(&self, n: usize) -> f64 {
        self.entries[n][n]
    }

    /// Largest off-triangle magnitude relative to the largest entry.
    pub fn triangularity_defect(&self) -> f64 {
        let mut max_all = 0.0f64;
        let mut max_upper = 0.0f64;
        for (n, row) in self.entries.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                max_all = max_all.max(v.abs());
                if k > n {
                    max_upper = max_upper.max(v.abs());
                }
            }
        }
        if max_all == 0.0 {
            0.0
        } else {
            max_upper / max_all
        }
    }

    /// Expected diagonal 2 eps_n - a^2 + 2a(b - n) = -(b-n)^2 - (b-a-n)^2.
    pub fn predicted_diagonal(params: &ModelParams, n: usize) -> f64 {
        let (a, b) = (params.a(), params.b());
        let nf = n as f64;
        -(b - nf).powi(2) - (b - a - nf).powi(2)
    }
}

/// Fit the closure matrix by least squares over collocation points:
/// evaluate H Omega_n and all Omega_k on the sample and solve row by row.
pub fn c_matrix(p: &ModelParams, basis_max: usize, cfg: &CollocationConfig) -> Result<CMatrix> {
    let size = basis_max + 1;
    if (basis_max as f64) >= p.b() {
        return Err(Error::IndexOutOfBoundState { n: basis_max, b: p.b() });
    }
    let modes: Vec<WaveFunction> = (0..size).map(|n| zero_mode(n, p)).collect::<Result<_>>()?;
    let h1 = hamiltonian(HamKind::H1, p);
    let pts = collocation_points(cfg);
    let rows = pts.len();

    let mut a = DMatrix::<f64>::zeros(rows, size);
    for (r, pt) in pts.iter().enumerate() {
        for (k, omega) in modes.iter().enumerate() {
            a[(r, k)] = omega.value(*pt)?;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > 1e10 {
        return Err(Error::IllConditioned { cond: condition });
    }

    let mut entries = Vec::with_capacity(size);
    let mut fit_residual = 0.0f64;
    for omega in modes.iter() {
        let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
        for (r, pt) in pts.iter().enumerate() {
            rhs[r] = h1.apply(omega, *pt, 0)?.value();
        }
        let sol = svd
            .solve(&rhs, 0.0)
            .map_err(|_| Error::IllConditioned { cond: condition })?;
        let resid = (&a * &sol - &rhs).norm() / rhs.norm().max(1e-300);
        fit_residual = fit_residual.max(resid);
        entries.push(sol.iter().copied().collect());
    }
    Ok(CMatrix { size, entries, fit_residual, condition, params: *p })
}

/// Eigen-combination of zero modes for the diagonal entry c_nn, obtained by
/// triangular back-substitution. The coefficient vector v satisfies
/// sum_k v_k c_{k j} = c_nn v_j with v_n = 1, which is solvable whenever the
/// relevant diagonal entries stay apart.
pub fn principal_state(n: usize, p: &ModelParams, basis_max: usize) -> Result<WaveFunction> {
    principal_state_from(n, p, &c_matrix(p, basis_max.max(n), &CollocationConfig::default())?)
}

/// Same construction against an already-fitted closure matrix.
pub fn principal_state_from(n: usize, p: &ModelParams, cm: &CMatrix) -> Result<WaveFunction> {
    if n >= cm.size {
        return Err(Error::InvalidParams(format!("principal index {n} exceeds basis size {}", cm.size)));
    }
    let cnn = cm.entries[n][n];
    let scale = (0..cm.size).fold(0.0f64, |acc, k| acc.max(cm.entries[k][k].abs())).max(1.0);
    for k in 0..n {
        if (cnn - cm.entries[k][k]).abs() < 1e-8 * scale {
            return Err(Error::ResonanceError { n, k });
        }
    }
    let mut v = vec![0.0; n + 1];
    v[n] = 1.0;
    for j in (0..n).rev() {
        let mut acc = 0.0;
        for k in (j + 1)..=n {
            acc += cm.entries[k][j] * v[k];
        }
        v[j] = acc / (cnn - cm.entries[j][j]);
    }
    let parts: Vec<(f64, WaveFunction)> = v
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, w)| Ok((*w, zero_mode(k, p)?)))
        .collect::<Result<_>>()?;
    let meta = WaveMeta {
        label: format!("principal({n};a={},b={},c={})", p.a(), p.b(), p.c()),
        params: Some(*p),
        n: Some(n),
        m: Some(0),
        big_m: Some(0),
        branch: Some(Branch::Quasi),
        symmetry: Symmetry::Symmetric,
        domain: Domain::OffDiagonal,
        energy: Some(cnn),
    };
    Ok(WaveFunction::linear_combination(meta, parts))
}

/// Chain energy -(b - M - n)^2 - (b - M - a - m - n)^2.
pub fn chain_energy(p: &ModelParams, n: usize, m: usize, big_m: usize) -> f64 {
    let base = p.b() - big_m as f64;
    -(base - n as f64).powi(2) - (base - p.a() - m as f64 - n as f64).powi(2)
}

/// Double-chain state: M twisted charges after m plain charges acting on the
/// principal state at shifted couplings (a + m, b - M). Parity alternates
/// with m; the twisted charges preserve it.
pub fn chain_state(n: usize, m: usize, big_m: usize, p: &ModelParams, basis_max: usize) -> Result<WaveFunction> {
    chain_state_with_depth(n, m, big_m, p, basis_max, DEFAULT_MAX_CHAIN_DEPTH)
}

pub fn chain_state_with_depth(
    n: usize,
    m: usize,
    big_m: usize,
    p: &ModelParams,
    basis_max: usize,
    max_depth: usize,
) -> Result<WaveFunction> {
    if m + big_m > max_depth {
        return Err(Error::ChainDepthExceeded { depth: m + big_m, max: max_depth });
    }
    let inner_params = p.shift_a(m as f64).shift_b(-(big_m as f64))?;
    let mut psi = principal_state(n, &inner_params, basis_max)?;
    let b_low = p.shift_b(-(big_m as f64))?;
    for j in (0..m).rev() {
        let q = supercharge(ChargeKind::QPlus, &b_low.shift_a(j as f64));
        psi = WaveFunction::applied(&q, &psi);
    }
    for s in 0..big_m {
        let stage = p.shift_b(-((big_m - 1 - s) as f64))?;
        let q = supercharge(ChargeKind::QTildePlus, &stage);
        psi = WaveFunction::applied(&q, &psi);
    }
    let energy = chain_energy(p, n, m, big_m);
    psi.meta = WaveMeta {
        label: format!("chain({n},{m},{big_m};a={},b={},c={})", p.a(), p.b(), p.c()),
        params: Some(*p),
        n: Some(n),
        m: Some(m),
        big_m: Some(big_m),
        branch: Some(Branch::Quasi),
        symmetry: if m % 2 == 0 { Symmetry::Symmetric } else { Symmetry::Antisymmetric },
        domain: Domain::OffDiagonal,
        energy: Some(energy),
    };
    Ok(psi)
}

/// Enumerate chain energies over an index box; equal energies are flagged.
pub fn quasi_exact_spectrum(
    p: &ModelParams,
    n_max: usize,
    m_max: usize,
    big_m_max: usize,
) -> Result<Vec<SpectrumEntry>> {
    if p.a() <= -0.5 {
        return Err(Error::RegionError { a: p.a() });
    }
    let mut out = Vec::new();
    for big_m in 0..=big_m_max {
        let base = p.b() - big_m as f64;
        for n in 0..=n_max {
            if (n as f64) >= base {
                continue;
            }
            for m in 0..=m_max {
                out.push(SpectrumEntry {
                    branch: Branch::Quasi,
                    n,
                    m,
                    big_m: Some(big_m),
                    energy: chain_energy(p, n, m, big_m),
                    params: *p,
                    normalizable: None,
                    degenerate: false,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        x.energy
            .total_cmp(&y.energy)
            .then(x.n.cmp(&y.n))
            .then(x.m.cmp(&y.m))
            .then(x.big_m.cmp(&y.big_m))
    });
    flag_degenerate(&mut out);
    Ok(out)
}
