/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest admissible discarded weight when truncating a coherent state.
    pub tail: f64,
    /// Largest top-level population before â† refuses to act.
    pub overflow: f64,
    /// Largest amplitude above |2> tolerated by the amplified target gate.
    pub subspace: f64,
    /// Hermiticity check on density matrices and operators.
    pub hermitian: f64,
    /// Eigenvalue floor for positive semidefiniteness.
    pub psd: f64,
    /// Deviation allowed on the trace of a physical state above one.
    pub trace: f64,
    /// Largest probability mass the homodyne sampling grid may miss.
    pub grid_mass: f64,
    /// POVM completeness residual.
    pub completeness: f64,
    /// Success weight below which a conditional output is flagged as vanishing.
    pub vanishing_weight: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        tail: 1e-6,
        overflow: 1e-8,
        subspace: 1e-6,
        hermitian: 1e-10,
        psd: 1e-9,
        trace: 1e-10,
        grid_mass: 1e-6,
        completeness: 1e-6,
        vanishing_weight: 1e-15,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
