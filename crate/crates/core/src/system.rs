//! System description: pair potentials, box geometry, phase points, and
//! the configurational / kinetic energy split.
//!
//! Units are reduced throughout: particle mass 1, so kinetic energy is
//! |p|^2/2 per particle, and all lengths and energies are dimensionless.
//! The container is the cube [0, box_side]^3 with hard walls; positions
//! outside it are a domain error, never silently wrapped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction law between a pair of particles, as a function of their
/// separation. All variants are stable (energy bounded below by -N*B for
/// a constant B per particle) and tempered (zero beyond a finite range).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "snake_case")]
pub enum PairPotential {
    /// No interaction; the free gas.
    Ideal,
    /// Impenetrable spheres of diameter `sigma`: +inf inside, 0 outside.
    HardSphere { sigma: f64 },
    /// 12-6 potential truncated at `cutoff` and shifted so the energy is
    /// continuous (exactly zero) at the cutoff.
    LennardJones {
        well_depth: f64,
        sigma: f64,
        cutoff: f64,
    },
}

impl PairPotential {
    /// Conventional truncated-shifted 12-6 with cutoff 2.5 sigma.
    pub fn lennard_jones(well_depth: f64, sigma: f64) -> Self {
        PairPotential::LennardJones {
            well_depth,
            sigma,
            cutoff: 2.5 * sigma,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PairPotential::Ideal => "ideal",
            PairPotential::HardSphere { .. } => "hard_sphere",
            PairPotential::LennardJones { .. } => "lennard_jones",
        }
    }

    /// Pair energy at squared separation r2. Hard-core overlap is +inf,
    /// never an error; r = 0 for the smooth potentials also yields +inf.
    #[inline]
    pub fn pair_energy_r2(&self, r2: f64) -> f64 {
        match *self {
            PairPotential::Ideal => 0.0,
            PairPotential::HardSphere { sigma } => {
                if r2 < sigma * sigma {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PairPotential::LennardJones {
                well_depth,
                sigma,
                cutoff,
            } => {
                if r2 >= cutoff * cutoff {
                    return 0.0;
                }
                if r2 == 0.0 {
                    return f64::INFINITY;
                }
                let s2 = sigma * sigma / r2;
                let s6 = s2 * s2 * s2;
                let raw = 4.0 * well_depth * (s6 * s6 - s6);
                raw - self.lj_shift()
            }
        }
    }

    /// Pair energy at separation r.
    #[inline]
    pub fn pair_energy(&self, r: f64) -> f64 {
        self.pair_energy_r2(r * r)
    }

    /// Value of the untruncated 12-6 potential at the cutoff; subtracted
    /// from the truncated branch so the potential vanishes continuously.
    fn lj_shift(&self) -> f64 {
        match *self {
            PairPotential::LennardJones {
                well_depth,
                sigma,
                cutoff,
            } => {
                let s2 = sigma * sigma / (cutoff * cutoff);
                let s6 = s2 * s2 * s2;
                4.0 * well_depth * (s6 * s6 - s6)
            }
            _ => 0.0,
        }
    }

    /// Greatest lower bound used for the per-pair energy: 0 for Ideal and
    /// HardSphere, the depth of the shifted well for LennardJones.
    pub fn pair_lower_bound(&self) -> f64 {
        match *self {
            PairPotential::Ideal | PairPotential::HardSphere { .. } => 0.0,
            PairPotential::LennardJones {
                well_depth, sigma, ..
            } => {
                // Minimum of the 12-6 curve sits at r = 2^(1/6) sigma with
                // value -well_depth; the shift raises it slightly.
                let r_min = 2.0_f64.powf(1.0 / 6.0) * sigma;
                let v = self.pair_energy(r_min);
                debug_assert!(v >= -well_depth);
                v
            }
        }
    }

    /// Interaction range: separations beyond this contribute exactly zero.
    pub fn range(&self) -> f64 {
        match *self {
            PairPotential::Ideal => 0.0,
            PairPotential::HardSphere { sigma } => sigma,
            PairPotential::LennardJones { cutoff, .. } => cutoff,
        }
    }
}

/// A finite system: N identical unit-mass particles interacting through
/// `potential` inside the hard-walled cube [0, box_side]^3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n_particles: usize,
    pub box_side: f64,
    pub potential: PairPotential,
}

impl SystemSpec {
    pub fn new(n_particles: usize, box_side: f64, potential: PairPotential) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidParameter("n_particles must be >= 1".into()));
        }
        if !(box_side > 0.0) || !box_side.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box_side must be positive and finite, got {box_side}"
            )));
        }
        let spec = SystemSpec {
            n_particles,
            box_side,
            potential,
        };
        spec.check_packing()?;
        Ok(spec)
    }

    pub fn volume(&self) -> f64 {
        self.box_side.powi(3)
    }

    pub fn density(&self) -> f64 {
        self.n_particles as f64 / self.volume()
    }

    /// 3N, the configurational (and momentum) dimension.
    pub fn dof(&self) -> usize {
        3 * self.n_particles
    }

    /// For hard spheres, demand that at least one admissible configuration
    /// exists; witnessed by a cubic lattice with spacing above sigma.
    /// Sufficient, not necessary: denser systems that only fit
    /// non-lattice packings are rejected early rather than sampled forever.
    fn check_packing(&self) -> Result<()> {
        if let PairPotential::HardSphere { sigma } = self.potential {
            if self.lattice_spacing() <= sigma {
                return Err(Error::PackingInfeasible {
                    n: self.n_particles,
                    sigma,
                    box_side: self.box_side,
                });
            }
        }
        Ok(())
    }

    fn lattice_sites_per_axis(&self) -> usize {
        (self.n_particles as f64).cbrt().ceil() as usize
    }

    fn lattice_spacing(&self) -> f64 {
        self.box_side / self.lattice_sites_per_axis() as f64
    }

    /// Deterministic admissible starting configuration: the first N sites
    /// of a simple cubic lattice centered in each cell.
    pub fn lattice_configuration(&self) -> Vec<[f64; 3]> {
        let m = self.lattice_sites_per_axis();
        let a = self.lattice_spacing();
        let mut out = Vec::with_capacity(self.n_particles);
        'fill: for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if out.len() == self.n_particles {
                        break 'fill;
                    }
                    out.push([
                        (i as f64 + 0.5) * a,
                        (j as f64 + 0.5) * a,
                        (k as f64 + 0.5) * a,
                    ]);
                }
            }
        }
        out
    }
}

/// A point in the 6N-dimensional phase space: positions inside the box
/// paired with unconstrained momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    positions: Vec<[f64; 3]>,
    momenta: Vec<[f64; 3]>,
}

impl PhasePoint {
    pub fn new(spec: &SystemSpec, positions: Vec<[f64; 3]>, momenta: Vec<[f64; 3]>) -> Result<Self> {
        if positions.len() != spec.n_particles || momenta.len() != spec.n_particles {
            return Err(Error::ParticleCountMismatch {
                expected: spec.n_particles,
                got: positions.len().min(momenta.len()),
            });
        }
        check_in_box(spec, &positions)?;
        Ok(PhasePoint { positions, momenta })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn momenta(&self) -> &[[f64; 3]] {
        &self.momenta
    }
}

#[inline(always)]
pub(crate) fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn check_in_box(spec: &SystemSpec, positions: &[[f64; 3]]) -> Result<()> {
    for (i, p) in positions.iter().enumerate() {
        if p.iter().any(|&c| !(0.0..=spec.box_side).contains(&c)) {
            return Err(Error::PositionOutsideBox {
                index: i,
                box_side: spec.box_side,
                coords: *p,
            });
        }
    }
    Ok(())
}

/// Total interaction energy U(q) = sum over pairs. Walls are hard: any
/// position outside the box is a domain error. Overlapping hard cores
/// are legitimate configurations of infinite energy, so they return
/// +inf rather than an error.
pub fn config_energy(spec: &SystemSpec, positions: &[[f64; 3]]) -> Result<f64> {
    if positions.len() != spec.n_particles {
        return Err(Error::ParticleCountMismatch {
            expected: spec.n_particles,
            got: positions.len(),
        });
    }
    check_in_box(spec, positions)?;
    Ok(config_energy_unchecked(spec, positions))
}

/// Pair sum without the domain checks; samplers that generate positions
/// inside the box use this directly.
pub(crate) fn config_energy_unchecked(spec: &SystemSpec, positions: &[[f64; 3]]) -> f64 {
    if matches!(spec.potential, PairPotential::Ideal) {
        return 0.0;
    }
    let mut u = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            u += spec.potential.pair_energy_r2(dist2(&positions[i], &positions[j]));
            if u == f64::INFINITY {
                return f64::INFINITY;
            }
        }
    }
    u
}

/// Kinetic energy sum |p_i|^2 / 2 for unit masses.
pub fn kinetic_energy(momenta: &[[f64; 3]]) -> f64 {
    momenta
        .iter()
        .map(|p| 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]))
        .sum()
}
