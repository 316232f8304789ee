use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::report::CategoricalStep;
use super::table::RawTable;

/// Label table for one categorical column, in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vocabulary {
    values: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_values(values: Vec<String>) -> Self {
        let index = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Self { values, index }
    }

    fn intern(&mut self, value: &str) -> usize {
        if let Some(&i) = self.index.get(value) {
            return i;
        }
        let i = self.values.len();
        self.values.push(value.to_string());
        self.index.insert(value.to_string(), i);
        i
    }

    /// Label of `value`; unseen values map to the reserved label `len()`.
    pub fn label(&self, value: &str) -> usize {
        if self.index.len() != self.values.len() {
            // deserialized without the lookup index
            return self
                .values
                .iter()
                .position(|v| v == value)
                .unwrap_or(self.values.len());
        }
        self.index.get(value).copied().unwrap_or(self.values.len())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// Column name to vocabulary; the sidecar needed to score unseen rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vocabularies(pub BTreeMap<String, Vocabulary>);

impl Vocabularies {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("vocabularies serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        Ok(Self(
            raw.into_iter()
                .map(|(k, v)| (k, Vocabulary::from_values(v)))
                .collect(),
        ))
    }

    pub fn get(&self, column: &str) -> Option<&Vocabulary> {
        self.0.get(column)
    }
}

/// Result of encoding: every listed column as a real-valued vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedColumns {
    pub names: Vec<String>,
    /// Column-major values.
    pub values: Vec<Vec<f64>>,
    pub categorical: Vec<bool>,
}

fn parse_all(cells: &[&str]) -> Option<Vec<f64>> {
    cells
        .iter()
        .map(|c| c.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

/// Encodes `feature_columns` of `table`.
///
/// A column stays numeric when every cell parses as a finite number (always
/// true for a cleaned table re-run) or when it is listed in `numeric_columns`
/// and parses. Everything else gets first-appearance integer labels.
pub fn encode_categoricals(
    table: &RawTable,
    feature_columns: &[String],
    numeric_columns: &[String],
) -> (EncodedColumns, Vocabularies, CategoricalStep) {
    let mut step = CategoricalStep::default();
    let mut vocabs = Vocabularies::default();
    let mut encoded = EncodedColumns {
        names: Vec::new(),
        values: Vec::new(),
        categorical: Vec::new(),
    };
    for name in feature_columns {
        let Some(idx) = table.column_index(name) else {
            continue;
        };
        let cells: Vec<&str> = table.column(idx).collect();
        let values = match parse_all(&cells) {
            Some(v) => {
                step.numeric_columns.push(name.clone());
                encoded.categorical.push(false);
                v
            }
            None => {
                if numeric_columns.contains(name) {
                    step.numeric_fallback_columns.push(name.clone());
                }
                let mut vocab = Vocabulary::default();
                let labels = cells.iter().map(|c| vocab.intern(c) as f64).collect();
                step.encoded_columns.push((name.clone(), vocab.len()));
                vocabs.0.insert(name.clone(), vocab);
                encoded.categorical.push(true);
                labels
            }
        };
        encoded.names.push(name.clone());
        encoded.values.push(values);
    }
    (encoded, vocabs, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_column(name: &str, cells: &[&str]) -> RawTable {
        RawTable::new(
            vec![name.to_string()],
            cells.iter().map(|c| vec![c.to_string()]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn first_appearance_labels() {
        let t = one_column("compiler", &["gcc", "icc", "gcc"]);
        let (enc, vocabs, step) = encode_categoricals(&t, &["compiler".into()], &[]);
        assert_eq!(enc.values[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(vocabs.get("compiler").unwrap().len(), 2);
        assert_eq!(step.encoded_columns, vec![("compiler".to_string(), 2)]);
    }

    #[test]
    fn binary_column() {
        let t = one_column("parallel", &["yes", "no", "no"]);
        let (enc, _, _) = encode_categoricals(&t, &["parallel".into()], &[]);
        assert_eq!(enc.values[0], vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn empty_string_gets_its_own_label() {
        let t = one_column("othercache", &["1", "", "2", ""]);
        let (enc, vocabs, step) =
            encode_categoricals(&t, &["othercache".into()], &["othercache".into()]);
        assert_eq!(enc.values[0], vec![0.0, 1.0, 2.0, 1.0]);
        assert_eq!(vocabs.get("othercache").unwrap().values()[1], "");
        assert_eq!(
            step.numeric_fallback_columns,
            vec!["othercache".to_string()]
        );
    }

    #[test]
    fn unseen_value_maps_to_reserved_label() {
        let vocab = Vocabulary::from_values(vec!["a".into(), "b".into()]);
        assert_eq!(vocab.label("b"), 1);
        assert_eq!(vocab.label("zzz"), 2);
        let round: Vocabularies = Vocabularies::from_json(
            &Vocabularies([("c".to_string(), vocab)].into_iter().collect()).to_json(),
        )
        .unwrap();
        assert_eq!(round.get("c").unwrap().label("zzz"), 2);
    }

    #[test]
    fn numeric_columns_pass_through() {
        let t = one_column("#cores", &["8", "16", "8"]);
        let (enc, vocabs, _) = encode_categoricals(&t, &["#cores".into()], &[]);
        assert_eq!(enc.values[0], vec![8.0, 16.0, 8.0]);
        assert!(vocabs.0.is_empty());
    }
}
