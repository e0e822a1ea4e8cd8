use super::{RegionCategory, RegionSet};

/// Drops every closed region whose area does not exceed
/// `τ = (Σ closed areas) / n`. Background regions always stay. If the rule
/// would empty the frame of closed regions, the largest one is kept (lowest
/// id on ties). With no closed regions the input is returned with `tau`
/// unset.
pub fn suppress_noise(set: &RegionSet) -> RegionSet {
    let closed: Vec<(u32, usize)> = set.closed().map(|r| (r.id, r.area())).collect();
    if closed.is_empty() {
        return RegionSet { tau: None, ..set.clone() };
    }
    let tau = closed.iter().map(|&(_, a)| a as f64).sum::<f64>() / closed.len() as f64;

    let mut keep: Vec<u32> = closed
        .iter()
        .filter(|&&(_, a)| a as f64 > tau)
        .map(|&(id, _)| id)
        .collect();
    if keep.is_empty() {
        let (id, _) = closed
            .iter()
            .copied()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        keep.push(id);
    }

    let max = set.regions.last().map_or(0, |r| r.id) as usize;
    let mut retained = vec![false; max + 1];
    for r in &set.regions {
        retained[r.id as usize] = r.category == RegionCategory::Background || keep.contains(&r.id);
    }
    let labels = set
        .labels
        .iter()
        .map(|&l| if retained[l as usize] { l } else { 0 })
        .collect();
    let regions = set
        .regions
        .iter()
        .filter(|r| retained[r.id as usize])
        .cloned()
        .collect();
    RegionSet { labels, regions, tau: Some(tau), ..set.clone() }
}
