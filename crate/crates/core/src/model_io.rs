//! JSON persistence of fitted models.
//!
//! Floats are written in shortest round-trip form, so a saved model reloads
//! bit for bit and its inverse reproduces the training data exactly.

use serde::{Deserialize, Serialize};

use crate::copula_emp::RankMatrix;
use crate::error::{Error, Result};
use crate::marginal::MarginalModel;
use crate::ng::{CopulaModel, NgModel, RerankPlan};

pub const FORMAT_NAME: &str = "copgauss-ng";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    n: usize,
    p: usize,
    deltas: Vec<usize>,
    shifts: Vec<usize>,
    /// Sorted training values, one array per column.
    marginals: Vec<MarginalModel>,
    /// Training ranks (1-based), one array per column.
    ranks: RankMatrix,
}

pub fn model_to_json(model: &NgModel) -> Result<String> {
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        n: model.n(),
        p: model.p(),
        deltas: model.plan().deltas().to_vec(),
        shifts: model.plan().shifts().to_vec(),
        marginals: model.marginals().to_vec(),
        ranks: model.ranks().clone(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<NgModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported model format {:?} version {}",
            file.format, file.version
        )));
    }
    if file.ranks.n() != file.n || file.ranks.p() != file.p {
        return Err(Error::Format(format!(
            "header says {}x{}, ranks are {}x{}",
            file.n,
            file.p,
            file.ranks.n(),
            file.ranks.p()
        )));
    }
    let plan = RerankPlan::new(file.n, file.p, &file.deltas).map_err(|e| Error::Format(e.to_string()))?;
    if plan.shifts() != file.shifts.as_slice() {
        return Err(Error::Format("stored shifts do not match the offsets".into()));
    }
    for (c, m) in file.marginals.iter().enumerate() {
        let col = file.ranks.column(c);
        let consistent = (0..file.n).all(|k| {
            let r = file.ranks.row_with_rank(c, k + 1);
            col[r] as usize == k + 1
        });
        if !consistent || m.n() != file.n {
            return Err(Error::Format(format!("column {c} is inconsistent")));
        }
    }
    let copula = CopulaModel::from_parts(file.marginals, file.ranks)
        .map_err(|e| Error::Format(e.to_string()))?;
    NgModel::from_parts(copula, plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ng::{fit_ng, ng_forward, ng_inverse_training};
    use crate::sampling::{make_case_dataset, CaseSpec};

    #[test]
    fn json_round_trip_is_exact() {
        let data = make_case_dataset(&CaseSpec::new(2, 120, 3, 5)).unwrap();
        let model = fit_ng(&data, Some(&[0, 4, 4])).unwrap();
        let text = model_to_json(&model).unwrap();
        let back = model_from_json(&text).unwrap();
        assert_eq!(back, model);
        let z = ng_forward(&model, &data).unwrap();
        assert_eq!(ng_inverse_training(&back, &z).unwrap(), data);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let data = make_case_dataset(&CaseSpec::new(1, 20, 2, 5)).unwrap();
        let text = model_to_json(&fit_ng(&data, Some(&[0, 1])).unwrap()).unwrap();
        assert!(model_from_json(&text.replace("\"version\":1", "\"version\":2")).is_err());
        assert!(model_from_json(&text.replace("\"deltas\":[0,1]", "\"deltas\":[0,2]")).is_err());
        assert!(model_from_json(&text[..text.len() / 2]).is_err());
        assert!(model_from_json("{}").is_err());
    }
}
