use super::inputs::{build_inputs_with, pad_length_for, InputSpec};
use super::model::ModelInput;
use super::RecurrentError;
use crate::corpus::{Dataset, Label};
use crate::embedding::EmbeddingMatrix;
use crate::text::{extract_contexts, extract_contexts_split, ContextBundle};

/// Labelled examples whose model inputs are produced on demand, so a large
/// corpus never holds every padded embedding sequence in memory at once.
pub trait Examples: Sync {
    fn len(&self) -> usize;
    fn label(&self, index: usize) -> Label;
    fn input(&self, index: usize) -> Result<ModelInput, RecurrentError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn labels(&self) -> Vec<Label> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

/// Pre-built inputs, mostly for tests and small synthetic tasks.
#[derive(Clone, Debug, Default)]
pub struct DenseExamples {
    pub inputs: Vec<ModelInput>,
    pub labels: Vec<Label>,
}

impl Examples for DenseExamples {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn label(&self, index: usize) -> Label {
        self.labels[index]
    }

    fn input(&self, index: usize) -> Result<ModelInput, RecurrentError> {
        Ok(self.inputs[index].clone())
    }
}

/// Token-level examples embedded lazily. Instances with several target
/// occurrences contribute their first occurrence.
#[derive(Clone, Debug)]
pub struct BundleExamples<'a> {
    pub bundles: Vec<ContextBundle>,
    pub labels: Vec<Label>,
    pub spec: InputSpec,
    pub embedding: &'a EmbeddingMatrix,
}

impl<'a> BundleExamples<'a> {
    pub fn from_dataset(
        dataset: &Dataset,
        spec: InputSpec,
        embedding: &'a EmbeddingMatrix,
        split_at_spans: bool,
    ) -> Result<Self, RecurrentError> {
        let mut bundles = Vec::with_capacity(dataset.len());
        for instance in dataset.instances() {
            let mut occurrences = if split_at_spans {
                extract_contexts_split(instance)?
            } else {
                extract_contexts(instance)?
            };
            if occurrences.is_empty() {
                return Err(RecurrentError::EmptyTarget);
            }
            bundles.push(occurrences.swap_remove(0));
        }
        Ok(BundleExamples {
            bundles,
            labels: dataset.labels(),
            spec,
            embedding,
        })
    }

    /// Longest side sequence in these examples.
    pub fn max_length(&self) -> usize {
        pad_length_for(&self.bundles, self.spec.arch, self.spec.target_both_sides)
    }

    pub fn with_pad_length(mut self, pad_length: Option<usize>) -> Self {
        self.spec.pad_length = pad_length;
        self
    }

    pub fn step_dim(&self) -> usize {
        self.spec.step_dim(self.embedding.dim())
    }
}

impl Examples for BundleExamples<'_> {
    fn len(&self) -> usize {
        self.bundles.len()
    }

    fn label(&self, index: usize) -> Label {
        self.labels[index]
    }

    fn input(&self, index: usize) -> Result<ModelInput, RecurrentError> {
        build_inputs_with(&self.bundles[index], &self.spec, self.embedding)
    }
}
