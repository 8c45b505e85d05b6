//! Linear-optical realization of the discrimination protocol.
//!
//! A single photon lives on `2N` propagation paths with two polarizations
//! each. Paths `0..N` carry the logical states; path `N + k` is the monitor
//! port that receives the inconclusive (H-polarized) light filtered off
//! logical path `k`. Polarization plays the ancilla: V is `|0⟩_a`, H is `|1⟩_a`.

mod compiler;
mod format;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::Dimension;

pub use compiler::{
    compile_conditional, compile_fourier_inverse, compile_full, compile_preparation,
    compile_projection, default_angles, detector_label, monitor_label,
};
pub use format::{from_json, from_text, to_json, to_text, NETLIST_SCHEMA_VERSION};
pub use simulate::{
    abstract_discrimination_map, abstract_output_state, butterfly_unitary, click_probabilities, fit_gauge, lower,
    simulate_netlist, verify_equivalence, GaugeFit, ModeMap, ModeOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    /// Offset of this polarization inside a path's mode pair.
    pub fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// One spatial-polarization mode of the photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub path: usize,
    pub polarization: Polarization,
}

impl Mode {
    pub fn new(path: usize, polarization: Polarization) -> Self {
        Self { path, polarization }
    }

    pub fn index(self) -> usize {
        2 * self.path + self.polarization.offset()
    }
}

/// The four stages of the setup, in the order the photon traverses them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// Preparation of `|Ψ_l⟩`.
    #[serde(rename = "I")]
    Preparation,
    /// Conditional polarization rotation (system⊗ancilla unitary).
    #[serde(rename = "II")]
    Conditional,
    /// Projection of the ancilla.
    #[serde(rename = "III")]
    Projection,
    /// Inverse Fourier multiport and path detection.
    #[serde(rename = "IV")]
    Detection,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Preparation,
        Stage::Conditional,
        Stage::Projection,
        Stage::Detection,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Stage::Preparation => "I",
            Stage::Conditional => "II",
            Stage::Projection => "III",
            Stage::Detection => "IV",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.label() == s)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A placed optical element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Element<T> {
    /// Polarization rotator on one path; Jones matrix `[[cos α, −sin α], [sin α, cos α]]` over (H, V).
    Hwp { angle: T, path: usize },
    /// Polarizing beam splitter: H crosses between the two paths, V stays.
    Pbs { paths: [usize; 2] },
    /// Phase shift `e^{iφ}` on a path, or on one polarization of it.
    Ps {
        phase: T,
        path: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pol: Option<Polarization>,
    },
    /// Polarization-independent 50:50 coupler `(1/√2)[[1, i], [i, 1]]`.
    Bs { paths: [usize; 2] },
    /// Mirror pair exchanging two paths without phase.
    Mirror { paths: [usize; 2] },
    /// Photodetector counting both polarizations of a path.
    Det { label: String, path: usize },
}

impl<T> Element<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Element::Hwp { .. } => "HWP",
            Element::Pbs { .. } => "PBS",
            Element::Ps { .. } => "PS",
            Element::Bs { .. } => "BS",
            Element::Mirror { .. } => "MIRROR",
            Element::Det { .. } => "DET",
        }
    }

    /// Paths the element touches.
    pub fn paths(&self) -> Vec<usize> {
        match self {
            Element::Hwp { path, .. } | Element::Ps { path, .. } | Element::Det { path, .. } => {
                vec![*path]
            }
            Element::Pbs { paths } | Element::Bs { paths } | Element::Mirror { paths } => {
                paths.to_vec()
            }
        }
    }
}

/// Ordered elements belonging to one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBlock<T> {
    pub stage: Stage,
    pub elements: Vec<Element<T>>,
}

impl<T> StageBlock<T> {
    pub fn new(stage: Stage) -> Self {
        Self {
            stage,
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, element: Element<T>) {
        self.elements.push(element);
    }
}

/// The compiled setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalNetlist<T> {
    pub dim: Dimension,
    /// Logical path holding the smallest coefficient; it carries no filter.
    pub reference_path: usize,
    /// Index `l` of the prepared state, when stage I is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prepared_state: Option<usize>,
    pub stages: Vec<StageBlock<T>>,
}

impl<T> OpticalNetlist<T> {
    /// Logical plus monitor paths.
    pub fn num_paths(&self) -> usize {
        2 * self.dim.get()
    }

    pub fn num_modes(&self) -> usize {
        2 * self.num_paths()
    }

    pub fn elements(&self) -> impl Iterator<Item = (Stage, &Element<T>)> {
        self.stages
            .iter()
            .flat_map(|b| b.elements.iter().map(move |e| (b.stage, e)))
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageBlock<T>> {
        self.stages.iter().find(|b| b.stage == stage)
    }

    /// Detectors in netlist order as `(label, path)`.
    pub fn detectors(&self) -> Vec<(String, usize)> {
        self.elements()
            .filter_map(|(_, e)| match e {
                Element::Det { label, path } => Some((label.clone(), *path)),
                _ => None,
            })
            .collect()
    }

    /// Checks stage ordering and that every element references existing, distinct paths.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim.get();
        if self.reference_path >= n {
            return Err(Error::MalformedNetlist(format!(
                "reference path {} outside 0..{n}",
                self.reference_path
            )));
        }
        if let Some(l) = self.prepared_state {
            if l >= n {
                return Err(Error::MalformedNetlist(format!("prepared state {l} outside 0..{n}")));
            }
        }
        for pair in self.stages.windows(2) {
            if pair[0].stage >= pair[1].stage {
                return Err(Error::MalformedNetlist(format!(
                    "stage {} follows stage {}",
                    pair[1].stage, pair[0].stage
                )));
            }
        }
        let paths = self.num_paths();
        for (stage, e) in self.elements() {
            let touched = e.paths();
            if let Some(p) = touched.iter().find(|&&p| p >= paths) {
                return Err(Error::MalformedNetlist(format!(
                    "{} in stage {stage} references path {p}, netlist has {paths}",
                    e.kind_name()
                )));
            }
            if touched.len() == 2 && touched[0] == touched[1] {
                return Err(Error::MalformedNetlist(format!(
                    "{} in stage {stage} couples path {} to itself",
                    e.kind_name(),
                    touched[0]
                )));
            }
        }
        Ok(())
    }
}

impl<T: Clone> OpticalNetlist<T> {
    /// Copy keeping only the listed stages.
    pub fn restricted_to(&self, stages: &[Stage]) -> Self {
        Self {
            dim: self.dim,
            reference_path: self.reference_path,
            prepared_state: self.prepared_state,
            stages: self
                .stages
                .iter()
                .filter(|b| stages.contains(&b.stage))
                .cloned()
                .collect(),
        }
    }
}

/// Element tallies by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub hwp: usize,
    pub pbs: usize,
    pub bs: usize,
    pub ps: usize,
    pub mirrors: usize,
    pub detectors: usize,
}

impl ComponentCount {
    /// HWP + PBS + BS, the total compared against `2^M (M + 2)`.
    pub fn core_total(&self) -> usize {
        self.hwp + self.pbs + self.bs
    }
}

pub fn count_components<T>(netlist: &OpticalNetlist<T>) -> ComponentCount {
    let mut count = ComponentCount::default();
    for (_, e) in netlist.elements() {
        match e {
            Element::Hwp { .. } => count.hwp += 1,
            Element::Pbs { .. } => count.pbs += 1,
            Element::Bs { .. } => count.bs += 1,
            Element::Ps { .. } => count.ps += 1,
            Element::Mirror { .. } => count.mirrors += 1,
            Element::Det { .. } => count.detectors += 1,
        }
    }
    count
}

/// Expected `(HWP, PBS, BS)` for `N = 2^M` with a unique smallest coefficient.
pub fn expected_core_counts(dim: Dimension) -> Result<(usize, usize, usize)> {
    let m = dim.log2()? as usize;
    let n = dim.get();
    Ok((2 * n - 1, 2 * (n - 1), n / 2 * m))
}
