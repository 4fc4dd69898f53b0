use serde::{Deserialize, Serialize};

use super::InteractorError;
use crate::camera::CameraView;
use crate::numerics::Matrix;

pub const DEFAULT_K_IMG: usize = 90;
pub const DEFAULT_K_BEV: usize = 300;

/// Instruction token embeddings, `N_inst × D`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstructionEmbedding {
    tokens: Matrix,
}

impl InstructionEmbedding {
    pub fn new(tokens: Matrix) -> Self {
        Self { tokens }
    }

    pub fn tokens(&self) -> &Matrix {
        &self.tokens
    }

    pub fn dim(&self) -> usize {
        self.tokens.cols()
    }
}

/// Per-camera token matrices sharing one hidden size.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewFeatureSet {
    views: Vec<Matrix>,
    view_names: Vec<String>,
}

impl ViewFeatureSet {
    /// Names views after the canonical camera order when there are six of
    /// them, and `view0`, `view1`, … otherwise.
    pub fn new(views: Vec<Matrix>) -> Result<Self, InteractorError> {
        let names = if views.len() == CameraView::ALL.len() {
            CameraView::ALL.iter().map(|v| v.as_str().to_string()).collect()
        } else {
            (0..views.len()).map(|i| format!("view{i}")).collect()
        };
        Self::with_names(views, names)
    }

    pub fn with_names(views: Vec<Matrix>, view_names: Vec<String>) -> Result<Self, InteractorError> {
        let first = views
            .first()
            .ok_or_else(|| InteractorError::Precondition("at least one view is required".into()))?;
        if view_names.len() != views.len() {
            return Err(InteractorError::Precondition(format!(
                "{} view names for {} views",
                view_names.len(),
                views.len()
            )));
        }
        let d = first.cols();
        if let Some((i, m)) = views.iter().enumerate().find(|(_, m)| m.cols() != d) {
            return Err(InteractorError::Precondition(format!(
                "view {i} has hidden size {}, expected {d}",
                m.cols()
            )));
        }
        Ok(Self { views, view_names })
    }

    pub fn views(&self) -> &[Matrix] {
        &self.views
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.views[0].cols()
    }

    pub fn token_counts(&self) -> Vec<usize> {
        self.views.iter().map(Matrix::rows).collect()
    }

    /// Same names, new matrices. Shapes must match the originals.
    pub fn replace_views(&self, views: Vec<Matrix>) -> Result<Self, InteractorError> {
        if views.len() != self.views.len()
            || views.iter().zip(&self.views).any(|(a, b)| a.shape() != b.shape())
        {
            return Err(InteractorError::Precondition("replacement views change shapes".into()));
        }
        Ok(Self {
            views,
            view_names: self.view_names.clone(),
        })
    }
}

/// Bird's-eye-view tokens on an `H × W` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BevFeatureMap {
    tokens: Matrix,
    grid_shape: (usize, usize),
}

impl BevFeatureMap {
    pub fn new(tokens: Matrix, grid_shape: (usize, usize)) -> Result<Self, InteractorError> {
        if grid_shape.0 * grid_shape.1 != tokens.rows() {
            return Err(InteractorError::Precondition(format!(
                "BEV grid {}x{} does not hold {} tokens",
                grid_shape.0,
                grid_shape.1,
                tokens.rows()
            )));
        }
        Ok(Self { tokens, grid_shape })
    }

    /// Treats the tokens as a single-row grid.
    pub fn flat(tokens: Matrix) -> Self {
        let n = tokens.rows();
        Self {
            tokens,
            grid_shape: (1, n),
        }
    }

    pub fn tokens(&self) -> &Matrix {
        &self.tokens
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        self.grid_shape
    }
}

/// How per-instruction-token similarities collapse to one score per visual token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Max,
    Mean,
}

/// Top-k budgets. Ties in score are broken by ascending token index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub k_img: usize,
    pub k_bev: usize,
    pub reduction: Reduction,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            k_img: DEFAULT_K_IMG,
            k_bev: DEFAULT_K_BEV,
            reduction: Reduction::Max,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), InteractorError> {
        if self.k_img == 0 || self.k_bev == 0 {
            return Err(InteractorError::Precondition("k values must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of top-k selection over one source.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    /// Selected source indices, by descending score then ascending index.
    pub indices: Vec<usize>,
    /// The selected rows, in `indices` order.
    pub features: Matrix,
    /// Relevance score of every source token.
    pub scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSource {
    /// View name, or `"bev"`.
    pub source: String,
    /// Row index of the selected token within its source.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusedTokenSequence {
    pub tokens: Matrix,
    pub provenance: Vec<TokenSource>,
}

impl FusedTokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyDecoderOutput {
    pub response_tokens: Matrix,
}
