use std::collections::{BTreeSet, VecDeque};

use super::{boundary_pixels, Region, RegionCategory, RegionLabelMap, RegionSet};
use crate::geometry::{centroid, BBox};

fn border_contact(region: &Region, width: u32, height: u32) -> usize {
    region
        .boundary
        .iter()
        .filter(|&&p| {
            let (x, y) = (p % width, p / width);
            x == 0 || y == 0 || x + 1 == width || y + 1 == height
        })
        .count()
}

/// Labels adjacent to the outside of `region`, ignoring anything inside its
/// holes. `None` if the region reaches the frame border.
fn outer_neighbours(region: &Region, labels: &[u32], width: u32, height: u32) -> Option<BTreeSet<u32>> {
    let b = region.bbox;
    if b.x == 0 || b.y == 0 || b.right() == width || b.bottom() == height {
        return None;
    }
    // work in the bbox grown by one pixel; its rim is outside by construction
    let (x0, y0) = (b.x - 1, b.y - 1);
    let (bw, bh) = ((b.w + 2) as usize, (b.h + 2) as usize);
    let local = |x: u32, y: u32| (y - y0) as usize * bw + (x - x0) as usize;
    let global = |i: usize| (y0 + (i / bw) as u32) * width + x0 + (i % bw) as u32;

    let mut is_region = vec![false; bw * bh];
    for &p in &region.pixels {
        is_region[local(p % width, p / width)] = true;
    }
    let mut outside = vec![false; bw * bh];
    let mut queue = VecDeque::new();
    for i in 0..bw * bh {
        let (lx, ly) = (i % bw, i / bw);
        if (lx == 0 || ly == 0 || lx + 1 == bw || ly + 1 == bh) && !is_region[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    }
    // 8-connected complement, the dual of 4-connected regions
    while let Some(i) = queue.pop_front() {
        let (lx, ly) = ((i % bw) as i64, (i / bw) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (lx + dx, ly + dy);
                if nx < 0 || ny < 0 || nx >= bw as i64 || ny >= bh as i64 {
                    continue;
                }
                let j = ny as usize * bw + nx as usize;
                if !outside[j] && !is_region[j] {
                    outside[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    let mut out = BTreeSet::new();
    for &p in &region.boundary {
        let (x, y) = (p % width, p / width);
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                let i = local(nx, ny);
                if outside[i] {
                    out.insert(labels[global(i) as usize]);
                }
            }
        }
    }
    Some(out)
}

/// Assigns every region of a label map one category.
///
/// A region is `Background` when at least `border_points` of its boundary
/// pixels lie on the frame border. A closed region whose entire outer
/// boundary abuts one other closed region is `Enclosed` by it, and that
/// region becomes `Enclosing`. All other closed regions are `Independent`.
pub fn categorize_regions(map: &RegionLabelMap, border_points: usize, frame_index: usize) -> RegionSet {
    let mut set = RegionSet::from_label_map(map, frame_index);
    let (w, h) = (set.width, set.height);
    for r in &mut set.regions {
        if border_contact(r, w, h) >= border_points.max(1) {
            r.category = RegionCategory::Background;
        }
    }
    let mut enclosed = Vec::new();
    for r in set.regions.iter().filter(|r| r.is_closed()) {
        let Some(nbrs) = outer_neighbours(r, &set.labels, w, h) else { continue };
        if nbrs.len() != 1 {
            continue;
        }
        let by = *nbrs.first().expect("one neighbour");
        if by != 0 && by != r.id && set.region(by).is_some_and(Region::is_closed) {
            enclosed.push((r.id, by));
        }
    }
    for &(id, by) in &enclosed {
        let idx = set.regions.binary_search_by_key(&id, |r| r.id).expect("region exists");
        set.regions[idx].category = RegionCategory::Enclosed { by };
    }
    for &(_, by) in &enclosed {
        let idx = set.regions.binary_search_by_key(&by, |r| r.id).expect("region exists");
        if set.regions[idx].category == RegionCategory::Independent {
            set.regions[idx].category = RegionCategory::Enclosing;
        }
    }
    set
}

/// Folds every enclosed region into its outermost container. The result
/// holds only `Background` and `Independent` regions.
pub fn merge_enclosed(set: &RegionSet) -> RegionSet {
    let root = |mut id: u32| {
        // containment is acyclic; the bound guards malformed input
        for _ in 0..=set.regions.len() {
            match set.region(id).map(|r| r.category) {
                Some(RegionCategory::Enclosed { by }) => id = by,
                _ => break,
            }
        }
        id
    };
    let has_enclosed = set
        .regions
        .iter()
        .any(|r| matches!(r.category, RegionCategory::Enclosed { .. }));
    if !has_enclosed {
        return set.clone();
    }

    let max = set.regions.last().map_or(0, |r| r.id) as usize;
    let mut remap: Vec<u32> = (0..=max as u32).collect();
    for r in &set.regions {
        remap[r.id as usize] = root(r.id);
    }
    let labels: Vec<u32> = set.labels.iter().map(|&l| remap[l as usize]).collect();

    let mut regions: Vec<Region> = Vec::new();
    for r in &set.regions {
        if remap[r.id as usize] != r.id {
            continue;
        }
        let mut pixels = r.pixels.clone();
        for child in set.regions.iter().filter(|c| c.id != r.id && remap[c.id as usize] == r.id) {
            pixels = crate::geometry::union(&pixels, &child.pixels);
        }
        let category = match r.category {
            RegionCategory::Background => RegionCategory::Background,
            _ => RegionCategory::Independent,
        };
        let boundary = boundary_pixels(&pixels, r.id, &labels, set.width, set.height);
        regions.push(Region {
            id: r.id,
            bbox: BBox::from_pixels(&pixels, set.width).expect("non-empty"),
            centroid: centroid(&pixels, set.width).expect("non-empty"),
            pixels,
            boundary,
            category,
        });
    }
    RegionSet { labels, regions, ..set.clone() }
}
