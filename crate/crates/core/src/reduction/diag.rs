use crate::error::{Error, Result};
use crate::learner::OnlineLearner;
use crate::linalg::DenseVector;
use crate::norm_schedule::{NormSchedule, ScheduleKind};

use super::{Domain, LearnerConfig, VaryingNormLearner};

/// Per-coordinate learners, each measuring its coordinate by the running max of
/// the corresponding feature magnitude. Predictions `⟨f_t, w_t⟩` are unchanged
/// by invertible diagonal rescaling of the features.
#[derive(Clone, Debug)]
pub struct DiagScaleLearner {
    coords: Vec<VaryingNormLearner>,
}

impl DiagScaleLearner {
    pub fn new(dim: usize, config: LearnerConfig) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let coords = (0..dim)
            .map(|_| {
                VaryingNormLearner::new(
                    NormSchedule::new(ScheduleKind::DiagScale, 1)?,
                    Domain::WholeSpace,
                    config,
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self { coords })
    }

    pub fn coordinates(&self) -> &[VaryingNormLearner] {
        &self.coords
    }

    /// Running maxima `m_{t,i}`.
    pub fn running_max(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| c.schedule().running_max().unwrap_or(0.0))
            .collect()
    }
}

fn scalar(x: f64) -> Result<DenseVector> {
    DenseVector::new(vec![x])
}

impl OnlineLearner for DiagScaleLearner {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn observe_feature(&mut self, f: &DenseVector) -> Result<()> {
        f.check_dim(self.dim())?;
        for (c, &fi) in self.coords.iter_mut().zip(f.iter()) {
            c.observe_feature(&scalar(fi)?)?;
        }
        Ok(())
    }

    fn predict(&mut self) -> Result<DenseVector> {
        let w = self
            .coords
            .iter_mut()
            .map(|c| c.predict().map(|w| w[0]))
            .collect::<Result<Vec<_>>>()?;
        DenseVector::new(w)
    }

    fn update(&mut self, g: &DenseVector) -> Result<()> {
        g.check_dim(self.dim())?;
        for (c, &gi) in self.coords.iter_mut().zip(g.iter()) {
            c.update(&scalar(gi)?)?;
        }
        Ok(())
    }
}
