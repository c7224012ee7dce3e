//! Hierarchical balanced subsampling by speaker attributes.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decouple::TtsAttrs;
use crate::error::DatagenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StratKey {
    Age,
    Language,
    Gender,
}

impl StratKey {
    pub const DEFAULT_PRIORITY: [StratKey; 3] = [StratKey::Age, StratKey::Language, StratKey::Gender];

    fn value(self, a: &TtsAttrs) -> &str {
        let v = match self {
            StratKey::Age => &a.age,
            StratKey::Language => &a.lang,
            StratKey::Gender => &a.gender,
        };
        v.as_deref().unwrap_or("unknown")
    }
}

/// Max-min fair split of `budget` over cells with the given supplies. Cells
/// below the fair share get their whole supply and the surplus is spread over
/// the rest; a final remainder smaller than the number of open cells goes to
/// the earliest ones.
pub fn water_fill(budget: usize, supplies: &[usize]) -> Vec<usize> {
    let mut alloc = vec![0; supplies.len()];
    let mut remaining = budget.min(supplies.iter().sum());
    let mut open: Vec<usize> = (0..supplies.len()).filter(|&i| supplies[i] > 0).collect();
    while remaining > 0 && !open.is_empty() {
        let share = remaining / open.len();
        if share == 0 {
            for &i in open.iter().take(remaining) {
                alloc[i] += 1;
            }
            break;
        }
        for &i in &open {
            let g = share.min(supplies[i] - alloc[i]);
            alloc[i] += g;
            remaining -= g;
        }
        open.retain(|&i| alloc[i] < supplies[i]);
    }
    alloc
}

/// Picks `budget` record indices, balancing each key in `priority` within
/// the cells of the keys before it. Missing attributes form an `unknown`
/// group. Output indices are sorted.
pub fn stratified_sample(
    records: &[TtsAttrs],
    budget: usize,
    priority: &[StratKey],
    seed: u64,
) -> Result<Vec<usize>, DatagenError> {
    if records.is_empty() {
        return Err(DatagenError::EmptyCorpus);
    }
    if budget > records.len() {
        return Err(DatagenError::BudgetExceedsSupply {
            budget,
            supply: records.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(budget);
    fill(records, (0..records.len()).collect(), budget, priority, &mut rng, &mut out);
    out.sort_unstable();
    Ok(out)
}

fn fill(
    records: &[TtsAttrs],
    mut cell: Vec<usize>,
    budget: usize,
    priority: &[StratKey],
    rng: &mut ChaCha8Rng,
    out: &mut Vec<usize>,
) {
    let Some((&key, rest)) = priority.split_first() else {
        cell.shuffle(rng);
        out.extend(cell.into_iter().take(budget));
        return;
    };
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for i in cell {
        groups.entry(key.value(&records[i])).or_default().push(i);
    }
    let supplies: Vec<usize> = groups.values().map(Vec::len).collect();
    let alloc = water_fill(budget, &supplies);
    for (members, n) in groups.into_values().zip(alloc) {
        fill(records, members, n, rest, rng, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(ages: &[(&str, usize)]) -> Vec<TtsAttrs> {
        ages.iter()
            .flat_map(|&(age, n)| {
                (0..n).map(move |i| TtsAttrs {
                    age: Some(age.into()),
                    lang: Some(if i % 3 == 0 { "zh" } else { "en" }.into()),
                    gender: Some(if i % 2 == 0 { "f" } else { "m" }.into()),
                })
            })
            .collect()
    }

    fn age_counts(records: &[TtsAttrs], picked: &[usize]) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for &i in picked {
            *m.entry(records[i].age.clone().unwrap()).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn water_fill_examples() {
        assert_eq!(water_fill(50, &[100, 100]), [25, 25]);
        assert_eq!(water_fill(50, &[10, 100]), [10, 40]);
        assert_eq!(water_fill(7, &[3, 3, 3]), [3, 2, 2]);
        assert_eq!(water_fill(5, &[0, 9]), [0, 5]);
        assert_eq!(water_fill(100, &[1, 2]), [1, 2]);
    }

    #[test]
    fn age_buckets_balanced() {
        let r = corpus(&[("adult", 100), ("child", 100)]);
        let picked = stratified_sample(&r, 50, &StratKey::DEFAULT_PRIORITY, 1).unwrap();
        assert_eq!(picked.len(), 50);
        assert_eq!(age_counts(&r, &picked).values().copied().collect::<Vec<_>>(), [25, 25]);
        let r = corpus(&[("child", 10), ("adult", 100)]);
        let picked = stratified_sample(&r, 50, &StratKey::DEFAULT_PRIORITY, 1).unwrap();
        let c = age_counts(&r, &picked);
        assert_eq!((c["child"], c["adult"]), (10, 40));
    }

    #[test]
    fn errors_and_determinism() {
        assert_eq!(stratified_sample(&[], 0, &[], 0), Err(DatagenError::EmptyCorpus));
        let r = corpus(&[("a", 3)]);
        assert!(matches!(stratified_sample(&r, 4, &[], 0), Err(DatagenError::BudgetExceedsSupply { .. })));
        let r = corpus(&[("a", 30), ("b", 12), ("c", 5)]);
        let x = stratified_sample(&r, 20, &StratKey::DEFAULT_PRIORITY, 9).unwrap();
        assert_eq!(x, stratified_sample(&r, 20, &StratKey::DEFAULT_PRIORITY, 9).unwrap());
        assert!(x.windows(2).all(|w| w[0] < w[1]));
    }
}
