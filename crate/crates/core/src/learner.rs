use crate::error::Result;
use crate::linalg::DenseVector;

/// Online linear optimization protocol: optionally see a feature, predict, then
/// receive a (sub)gradient.
pub trait OnlineLearner {
    fn dim(&self) -> usize;

    /// Receives `f_t` before the round-`t` prediction. Learners that do not use
    /// features ignore it.
    fn observe_feature(&mut self, _f: &DenseVector) -> Result<()> {
        Ok(())
    }

    fn predict(&mut self) -> Result<DenseVector>;

    fn update(&mut self, g: &DenseVector) -> Result<()>;
}

/// Outcome of one round of a feature-based loss `c_t(⟨f_t, w⟩)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedStep {
    pub w: DenseVector,
    /// `⟨f_t, w_t⟩`.
    pub margin: f64,
    /// `∇_t ∈ ∂c_t(⟨f_t, w_t⟩)`.
    pub derivative: f64,
    /// `g_t = ∇_t f_t`.
    pub gradient: DenseVector,
}

/// Runs one round against `c_t(⟨f, ·⟩)`, where `derivative` maps the margin to
/// a subgradient of `c_t`.
pub fn supervised_step<L: OnlineLearner + ?Sized>(
    learner: &mut L,
    f: &DenseVector,
    derivative: impl FnOnce(f64) -> f64,
) -> Result<SupervisedStep> {
    learner.observe_feature(f)?;
    let w = learner.predict()?;
    let margin = f.dot(&w);
    let d = derivative(margin);
    let gradient = f.scaled(d);
    learner.update(&gradient)?;
    Ok(SupervisedStep {
        w,
        margin,
        derivative: d,
        gradient,
    })
}
