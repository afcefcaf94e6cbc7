//! Reduced dynamics of two dimers coupled to two Ising-correlated spin baths.
//!
//! Every system–bath coupling is diagonal in the collective `S1z`, `S2z`, so
//! the bath splits into sectors `|j1 m1⟩|j2 m2⟩` on which the dimers feel a
//! fixed 4×4 Hamiltonian. The reduced state is the Gibbs-weighted mixture of
//! the per-sector unitary orbits of `ρ0`. [`evolve_bruteforce`] evolves the
//! full dimer-plus-bath state spin by spin and serves as the reference.
//!
//! Dimer operators act on the product basis `{|3⟩|1⟩, |3⟩|2⟩, |4⟩|1⟩, |4⟩|2⟩}`:
//! dimer 2 is the first tensor factor, dimer 1 the second.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, CMatrix, Eigen, HermitianOperator, C64};
use crate::states::DensityMatrix;

/// Largest bath size the sector enumeration accepts.
pub const MAX_BATH_SPINS: u32 = 64;
/// Per-bath size bound for the full-space propagator.
pub const MAX_BRUTEFORCE_SPINS: u32 = 6;
/// Bound on `N1 + N2` for the full-space propagator (dimension `4·2^(N1+N2)`).
pub const MAX_BRUTEFORCE_TOTAL_SPINS: u32 = 8;

/// Dimer energies, transition amplitudes and bath couplings, all in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerParams {
    /// ε1..ε4 for levels |1⟩..|4⟩.
    pub eps: [f64; 4],
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    /// γ1: |1⟩–S1, γ2: |2⟩–S2, γ3: |3⟩–S1, γ4: |4⟩–S2.
    pub gamma: [f64; 4],
}

impl DimerParams {
    pub fn check(&self) -> Result<()> {
        let couplings = [self.j1, self.j2];
        let mut all = self.eps.iter().chain(&self.gamma).chain(&couplings);
        if all.all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Parameter("dimer parameters must be finite".into()))
        }
    }
}

/// Two spin-1/2 baths with Zeeman frequencies, Ising coupling and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathParams {
    #[serde(rename = "N1")]
    pub n1: u32,
    #[serde(rename = "N2")]
    pub n2: u32,
    pub alpha1: f64,
    pub alpha2: f64,
    pub q: f64,
    /// Temperature in units with k_B = 1; `f64::INFINITY` gives β = 0.
    #[serde(rename = "T")]
    pub temperature: f64,
}

impl BathParams {
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn check(&self) -> Result<()> {
        for (name, n) in [("N1", self.n1), ("N2", self.n2)] {
            if n == 0 || n % 2 != 0 || n > MAX_BATH_SPINS {
                return Err(Error::Parameter(format!(
                    "{name} must be an even spin count in 2..={MAX_BATH_SPINS}, got {n}"
                )));
            }
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Parameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if ![self.alpha1, self.alpha2, self.q]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Parameter("bath parameters must be finite".into()));
        }
        Ok(())
    }

    /// `q m1 m2 + α1 m1 + α2 m2`, the bath energy of a sector.
    fn sector_energy(&self, m1: f64, m2: f64) -> f64 {
        self.q * m1 * m2 + self.alpha1 * m1 + self.alpha2 * m2
    }
}

/// Multiplicity of total spin `j = two_j/2` among `n` spin-1/2 particles:
/// `(2j+1)·n! / ((n/2 + j + 1)!·(n/2 − j)!)`.
pub fn bath_degeneracy(n: u32, two_j: u32) -> Result<u128> {
    if n > MAX_BATH_SPINS || two_j > n || !(n - two_j).is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "no spin j = {}/2 among {n} spin-1/2 particles",
            two_j
        )));
    }
    // n!/((n/2+j+1)!(n/2-j)!) = C(n, n/2-j) / (n/2+j+1)
    let k = (n - two_j) / 2;
    let upper = (n + two_j) / 2 + 1;
    Ok(u128::from(two_j + 1) * binomial(n, k) / u128::from(upper))
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// One bath sector `|j1 m1⟩|j2 m2⟩` with its normalized Gibbs weight
/// (already multiplied by both degeneracies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSector {
    pub j1: f64,
    pub m1: f64,
    pub j2: f64,
    pub m2: f64,
    pub weight: f64,
}

/// `(2j, 2m, ln ν)` for every (j, m) of one bath, j descending, m ascending.
fn single_bath_levels(n: u32) -> Vec<(u32, i64, f64)> {
    let mut out = Vec::new();
    let mut two_j = n;
    loop {
        let ln_nu = (bath_degeneracy(n, two_j).expect("valid j") as f64).ln();
        let tj = i64::from(two_j);
        for two_m in (-tj..=tj).step_by(2) {
            out.push((two_j, two_m, ln_nu));
        }
        if two_j < 2 {
            break;
        }
        two_j -= 2;
    }
    out
}

/// `(j1, m1, j2, m2)` for one bath sector.
type SectorLabel = (f64, f64, f64, f64);

fn ln_sector_weights(bath: &BathParams) -> Result<(Vec<SectorLabel>, Vec<f64>)> {
    bath.check()?;
    let beta = bath.beta();
    let b1 = single_bath_levels(bath.n1);
    let b2 = single_bath_levels(bath.n2);
    let mut labels = Vec::with_capacity(b1.len() * b2.len());
    let mut ln_w = Vec::with_capacity(b1.len() * b2.len());
    for &(tj1, tm1, ln1) in &b1 {
        for &(tj2, tm2, ln2) in &b2 {
            let (m1, m2) = (tm1 as f64 / 2.0, tm2 as f64 / 2.0);
            let energy = if beta == 0.0 {
                0.0
            } else {
                beta * bath.sector_energy(m1, m2)
            };
            labels.push((tj1 as f64 / 2.0, m1, tj2 as f64 / 2.0, m2));
            ln_w.push(ln1 + ln2 - energy);
        }
    }
    Ok((labels, ln_w))
}

/// `ln Z`, computed with the largest exponent factored out.
pub fn log_partition_function(bath: &BathParams) -> Result<f64> {
    let (_, ln_w) = ln_sector_weights(bath)?;
    Ok(log_sum_exp(&ln_w))
}

/// `Z = Σ ν(N1,j1) ν(N2,j2) exp(−β(q m1 m2 + α1 m1 + α2 m2))` over all sectors.
pub fn partition_function(bath: &BathParams) -> Result<f64> {
    log_partition_function(bath).map(f64::exp)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// All bath sectors with weights normalized by `Z`.
pub fn bath_sectors(bath: &BathParams) -> Result<Vec<BathSector>> {
    let (labels, ln_w) = ln_sector_weights(bath)?;
    let ln_z = log_sum_exp(&ln_w);
    Ok(labels
        .into_iter()
        .zip(ln_w)
        .map(|((j1, m1, j2, m2), lw)| BathSector {
            j1,
            m1,
            j2,
            m2,
            weight: (lw - ln_z).exp(),
        })
        .collect())
}

/// Total weight per `(m1, m2)`, summed over `j1, j2`; m1 then m2 ascending.
pub fn magnetization_weights(bath: &BathParams) -> Result<Vec<(f64, f64, f64)>> {
    let sectors = bath_sectors(bath)?;
    let (n1, n2) = (bath.n1 as usize, bath.n2 as usize);
    let mut grid = vec![0.0; (n1 + 1) * (n2 + 1)];
    for s in &sectors {
        let i = (s.m1 + n1 as f64 / 2.0).round() as usize;
        let k = (s.m2 + n2 as f64 / 2.0).round() as usize;
        grid[i * (n2 + 1) + k] += s.weight;
    }
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..=n1 {
        for k in 0..=n2 {
            let w = grid[i * (n2 + 1) + k];
            if w > 0.0 {
                out.push((i as f64 - n1 as f64 / 2.0, k as f64 - n2 as f64 / 2.0, w));
            }
        }
    }
    Ok(out)
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn two_level(e0: f64, e1: f64, coupling: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[real(e0), real(coupling), real(coupling), real(e1)])
}

/// Dimer Hamiltonian conditioned on bath magnetizations `(m1, m2)`:
/// `I ⊗ h1 + h2 ⊗ I` with `h1 = diag(ε1+γ1 m1, ε2+γ2 m2) + J1 σx` and
/// `h2 = diag(ε3+γ3 m1, ε4+γ4 m2) + J2 σx`. The bath energy is a global
/// phase within the sector and is left out.
pub fn sector_hamiltonian(d: &DimerParams, m1: f64, m2: f64) -> HermitianOperator {
    let h1 = two_level(d.eps[0] + d.gamma[0] * m1, d.eps[1] + d.gamma[1] * m2, d.j1);
    let h2 = two_level(d.eps[2] + d.gamma[2] * m1, d.eps[3] + d.gamma[3] * m2, d.j2);
    let id = CMatrix::identity(2, 2);
    let h = id.kronecker(&h1) + h2.kronecker(&id);
    HermitianOperator::new(h, vec![2, 2]).expect("real symmetric by construction")
}

fn check_dimer_state(rho0: &DensityMatrix) -> Result<()> {
    if rho0.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "dimer state must have dims [2, 2], got {:?}",
            rho0.dims()
        )));
    }
    Ok(())
}

/// Precomputed sector spectra for repeated evolution with fixed parameters.
#[derive(Debug, Clone)]
pub struct SectorPropagator {
    sectors: Vec<(f64, Eigen)>,
}

impl SectorPropagator {
    pub fn new(d: &DimerParams, bath: &BathParams) -> Result<Self> {
        d.check()?;
        let sectors = magnetization_weights(bath)?
            .into_iter()
            .map(|(m1, m2, w)| {
                let h = sector_hamiltonian(d, m1, m2);
                matfun::eig_hermitian(&h).map(|eig| (w, eig))
            })
            .collect::<Result<_>>()?;
        Ok(Self { sectors })
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    /// `ρ_d(t) = Σ_s w_s U_s(t) ρ0 U_s(t)^†`.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        check_dimer_state(rho0)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Parameter(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let mut acc = CMatrix::zeros(4, 4);
        for (w, eig) in &self.sectors {
            let u = eig.reconstruct_with(|lambda| C64::from_polar(1.0, -lambda * t));
            acc += (&u * rho0.matrix() * u.adjoint()) * real(*w);
        }
        Ok(DensityMatrix::trusted(HermitianOperator::hermitized(
            &acc,
            vec![2, 2],
        )?))
    }
}

/// Reduced dimer state at time `t` by the weighted sector sum.
pub fn evolve(
    rho0: &DensityMatrix,
    d: &DimerParams,
    bath: &BathParams,
    t: f64,
) -> Result<DensityMatrix> {
    SectorPropagator::new(d, bath)?.evolve(rho0, t)
}

/// Collective `S^z = Σ σz/2` on `n` explicit spins.
fn collective_sz(n: u32) -> CMatrix {
    let dim = 1usize << n;
    let sigma_z = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)]);
    let mut total = CMatrix::zeros(dim, dim);
    for k in 0..n {
        let mut term = CMatrix::identity(1, 1);
        for site in 0..n {
            term = if site == k {
                term.kronecker(&sigma_z)
            } else {
                term.kronecker(&CMatrix::identity(2, 2))
            };
        }
        total += term * real(0.5);
    }
    total
}

/// Full-space reference: builds `H = H_d + Σ H_Bi + Σ H_diBj + q S1z S2z` on
/// the dimer and every bath spin, starts from `ρ0 ⊗ exp(−β H_bath)/Z`,
/// conjugates by `exp(−iHt)` and traces the baths out.
pub fn evolve_bruteforce(
    rho0: &DensityMatrix,
    d: &DimerParams,
    bath: &BathParams,
    t: f64,
) -> Result<DensityMatrix> {
    check_dimer_state(rho0)?;
    d.check()?;
    bath.check()?;
    if bath.n1 > MAX_BRUTEFORCE_SPINS
        || bath.n2 > MAX_BRUTEFORCE_SPINS
        || bath.n1 + bath.n2 > MAX_BRUTEFORCE_TOTAL_SPINS
    {
        return Err(Error::Parameter(format!(
            "full-space propagation needs N1, N2 <= {MAX_BRUTEFORCE_SPINS} and N1 + N2 <= {MAX_BRUTEFORCE_TOTAL_SPINS}, got N1 = {}, N2 = {}",
            bath.n1, bath.n2
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }

    let id2 = CMatrix::identity(2, 2);
    let up = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(0.0)]);
    let down = CMatrix::from_row_slice(2, 2, &[real(0.0), real(0.0), real(0.0), real(1.0)]);
    let sigma_x = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
    // dimer 2 (|3⟩, |4⟩) is the first factor, dimer 1 (|1⟩, |2⟩) the second
    let p1 = id2.kronecker(&up);
    let p2 = id2.kronecker(&down);
    let p3 = up.kronecker(&id2);
    let p4 = down.kronecker(&id2);
    let h_d1 = &p1 * real(d.eps[0]) + &p2 * real(d.eps[1]) + id2.kronecker(&sigma_x) * real(d.j1);
    let h_d2 = &p3 * real(d.eps[2]) + &p4 * real(d.eps[3]) + sigma_x.kronecker(&id2) * real(d.j2);
    let h_dimer = h_d1 + h_d2;

    let s1 = collective_sz(bath.n1);
    let s2 = collective_sz(bath.n2);
    let (d1, d2) = (s1.nrows(), s2.nrows());
    let s1_full = s1.kronecker(&CMatrix::identity(d2, d2));
    let s2_full = CMatrix::identity(d1, d1).kronecker(&s2);
    let h_bath = &s1_full * real(bath.alpha1)
        + &s2_full * real(bath.alpha2)
        + (&s1_full * &s2_full) * real(bath.q);

    let id_dimer = CMatrix::identity(4, 4);
    let id_bath = CMatrix::identity(d1 * d2, d1 * d2);
    let h = h_dimer.kronecker(&id_bath)
        + id_dimer.kronecker(&h_bath)
        + p1.kronecker(&s1_full) * real(d.gamma[0])
        + p2.kronecker(&s2_full) * real(d.gamma[1])
        + p3.kronecker(&s1_full) * real(d.gamma[2])
        + p4.kronecker(&s2_full) * real(d.gamma[3]);
    let dims = vec![4, d1 * d2];
    let h = HermitianOperator::hermitized(&h, dims.clone())?;

    let bath_op = HermitianOperator::hermitized(&h_bath, vec![d1 * d2])?;
    let eig = matfun::eig_hermitian(&bath_op)?;
    let beta = bath.beta();
    let ground = eig.values.last().copied().unwrap_or(0.0);
    let gibbs = eig.reconstruct_with(|e| {
        if beta == 0.0 {
            real(1.0)
        } else {
            real((-beta * (e - ground)).exp())
        }
    });
    let z = gibbs.trace();
    let rho_bath = gibbs.map(|v| v / z);

    let rho_full = HermitianOperator::hermitized(&rho0.matrix().kronecker(&rho_bath), dims)?;
    let u = matfun::unitary_exp(&h, t)?;
    let evolved = rho_full.conjugate_by(&u)?;
    let reduced = matfun::partial_trace(&evolved, &[0])?.with_dims(vec![2, 2])?;
    Ok(DensityMatrix::trusted(reduced))
}
