//! Parametric circuit families and adjoint-mode energy gradients.
//!
//! | family     | layout per block                                  | parameters  |
//! |------------|---------------------------------------------------|-------------|
//! | `HEA`      | linear CX chain, then RY and RZ on every qubit    | `2N(L+1)`   |
//! | `REAL_AMP` | linear CX chain, then RY on every qubit           | `N(L+1)`    |
//! | `HVA`      | RZZ on every bond, RX on every qubit (shared)     | `2L`        |
//! | `HVA_SB`   | HVA block, then RZ on every qubit (shared)        | `3L`        |
//!
//! HEA and REAL_AMP start with one extra rotation layer. HVA circuits start
//! from `|->^N`, prepared by fixed X and H gates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::lattice::LatticeSpec;
use crate::statevector::{AngleSource, Gate, StateVector};

pub const MAX_LAYERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "HEA")]
    Hea,
    #[serde(rename = "HVA")]
    Hva,
    #[serde(rename = "HVA_SB")]
    HvaSb,
    #[serde(rename = "REAL_AMP")]
    RealAmp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Hea => "HEA",
            Family::Hva => "HVA",
            Family::HvaSb => "HVA_SB",
            Family::RealAmp => "REAL_AMP",
        }
    }

    pub fn is_hamiltonian_variational(self) -> bool {
        matches!(self, Family::Hva | Family::HvaSb)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "HEA" => Ok(Family::Hea),
            "HVA" => Ok(Family::Hva),
            "HVA_SB" => Ok(Family::HvaSb),
            "REAL_AMP" => Ok(Family::RealAmp),
            _ => Err(Error::InvalidArgument(format!(
                "unknown ansatz family {s:?}"
            ))),
        }
    }
}

/// Where the symmetry-breaking RZ layer of `HVA_SB` goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SbPlacement {
    #[default]
    PerLayer,
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: Family,
    pub layers: usize,
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub sb_placement: SbPlacement,
}

impl AnsatzSpec {
    pub fn new(family: Family, layers: usize, lattice: LatticeSpec) -> Self {
        Self {
            family,
            layers,
            lattice,
            sb_placement: SbPlacement::PerLayer,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.lattice.n_sites()
    }

    /// Parameter count implied by the family formulas.
    pub fn n_params(&self) -> usize {
        let (n, l) = (self.n_qubits(), self.layers);
        match (self.family, self.sb_placement) {
            (Family::Hea, _) => 2 * n * (l + 1),
            (Family::RealAmp, _) => n * (l + 1),
            (Family::Hva, _) => 2 * l,
            (Family::HvaSb, SbPlacement::PerLayer) => 3 * l,
            (Family::HvaSb, SbPlacement::Final) => 2 * l + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.layers > MAX_LAYERS {
            return Err(Error::InvalidArgument(format!(
                "layer count {} outside 1..={MAX_LAYERS}",
                self.layers
            )));
        }
        if self.family.is_hamiltonian_variational() && self.lattice.edges().is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} needs a lattice with bonds",
                self.family.name()
            )));
        }
        Ok(())
    }
}

/// Ordered gate list with parameter bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
    /// `param_map[slot]` lists the gate positions fed by `slot`.
    param_map: Vec<Vec<usize>>,
}

impl Circuit {
    /// Checks every gate against the register and that parameter slots form
    /// a dense range `0..n_params`, each feeding at least one gate.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut param_map: Vec<Vec<usize>> = Vec::new();
        for (pos, g) in gates.iter().enumerate() {
            g.validate(n_qubits)?;
            if g.kind.is_rotation() != g.angle.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "gate {pos} ({:?}) has an inconsistent angle source",
                    g.kind
                )));
            }
            if let Some(slot) = g.param_slot() {
                if slot >= param_map.len() {
                    param_map.resize(slot + 1, Vec::new());
                }
                param_map[slot].push(pos);
            }
        }
        if let Some(slot) = param_map.iter().position(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!(
                "parameter slot {slot} feeds no gate"
            )));
        }
        Ok(Self {
            n_qubits,
            n_params: param_map.len(),
            gates,
            param_map,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_map(&self) -> &[Vec<usize>] {
        &self.param_map
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParameterLength {
                expected: self.n_params,
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("circuit parameter"));
        }
        Ok(())
    }

    fn angle(g: &Gate, params: &[f64]) -> f64 {
        match g.angle {
            Some(AngleSource::Fixed(a)) => a,
            Some(AngleSource::Param(slot)) => params[slot],
            None => 0.0,
        }
    }

    /// Runs the circuit on `|0...0>`.
    pub fn prepare_state(&self, params: &[f64]) -> Result<StateVector> {
        self.check_params(params)?;
        let mut s = StateVector::zero(self.n_qubits)?;
        for g in &self.gates {
            s.apply_gate(g, Self::angle(g, params))?;
        }
        Ok(s)
    }

    pub fn energy(&self, params: &[f64], h: &PauliSum) -> Result<f64> {
        h.energy(&self.prepare_state(params)?)
    }

    /// Energy and its gradient in one forward and one backward sweep.
    ///
    /// Walking the gates in reverse, with `|ψ_k>` the state after gate `k` and
    /// `|λ_k>` the back-propagated `H|ψ>`, a rotation `exp(-iθA/2)` contributes
    /// `Im <λ_k|A|ψ_k>` to the derivative of its slot. Shared slots sum their
    /// gates' contributions.
    pub fn energy_and_gradient(&self, params: &[f64], h: &PauliSum) -> Result<(f64, Vec<f64>)> {
        let mut psi = self.prepare_state(params)?;
        let mut lambda = h.apply(&psi)?;
        let energy = psi.inner(&lambda)?.re;
        let mut grad = vec![0.0; self.n_params];
        for g in self.gates.iter().rev() {
            let angle = Self::angle(g, params);
            if let Some(slot) = g.param_slot() {
                let generator = g.generator().expect("parametric gates are rotations");
                grad[slot] += psi.pauli_matrix_element(&lambda, &generator)?.im;
            }
            psi.apply_gate_inverse(g, angle)?;
            lambda.apply_gate_inverse(g, angle)?;
        }
        Ok((energy, grad))
    }

    pub fn energy_gradient(&self, params: &[f64], h: &PauliSum) -> Result<Vec<f64>> {
        Ok(self.energy_and_gradient(params, h)?.1)
    }
}

pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n_qubits();
    let l = spec.layers;
    let p = AngleSource::Param;
    let mut gates = Vec::new();
    match spec.family {
        Family::Hea | Family::RealAmp => {
            let with_rz = spec.family == Family::Hea;
            let per_layer = if with_rz { 2 * n } else { n };
            let rotations = |gates: &mut Vec<Gate>, layer: usize| {
                let base = layer * per_layer;
                gates.extend((0..n).map(|q| Gate::ry(q, p(base + q))));
                if with_rz {
                    gates.extend((0..n).map(|q| Gate::rz(q, p(base + n + q))));
                }
            };
            rotations(&mut gates, 0);
            for layer in 1..=l {
                gates.extend((0..n - 1).map(|q| Gate::cx(q, q + 1)));
                rotations(&mut gates, layer);
            }
        }
        Family::Hva | Family::HvaSb => {
            for q in 0..n {
                gates.push(Gate::x(q));
                gates.push(Gate::h(q));
            }
            let edges = spec.lattice.edges();
            let sb_each =
                spec.family == Family::HvaSb && spec.sb_placement == SbPlacement::PerLayer;
            let stride = if sb_each { 3 } else { 2 };
            for layer in 0..l {
                let base = layer * stride;
                gates.extend(edges.iter().map(|&(a, b)| Gate::rzz(a, b, p(base))));
                gates.extend((0..n).map(|q| Gate::rx(q, p(base + 1))));
                if sb_each {
                    gates.extend((0..n).map(|q| Gate::rz(q, p(base + 2))));
                }
            }
            if spec.family == Family::HvaSb && spec.sb_placement == SbPlacement::Final {
                gates.extend((0..n).map(|q| Gate::rz(q, p(2 * l))));
            }
        }
    }
    let circuit = Circuit::new(n, gates)?;
    debug_assert_eq!(circuit.n_params(), spec.n_params());
    Ok(circuit)
}
