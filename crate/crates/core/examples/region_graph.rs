//! The eight-region layout used to explain weighted search: builds the
//! adjacency graph, weights the edges around region 3 and prunes them to
//! the West.

use rgtrack::noise_filter::{RegionLabelMap, RegionSet};
use rgtrack::region_graph::{assign_weights, build_graph, candidate_regions, node_table};
use rgtrack::roi_detect::{Cardinal, CardinalDirection};

fn main() {
    let tiles = [[1, 2, 2, 4], [1, 3, 7, 5], [6, 3, 7, 5], [6, 8, 8, 5]];
    let labels = (0..1600).map(|p| tiles[p / 400][p % 40 / 10]).collect();
    let set = RegionSet::from_label_map(&RegionLabelMap::new(40, 40, labels), 0);

    let graph = build_graph(&set);
    let table = node_table(&graph, 3).unwrap();
    for (v, d) in table.entries() {
        println!("v{v}: distance {d:?}");
    }
    let weighted = assign_weights(&graph, &table);
    print!("{}", weighted.to_edge_list());

    println!("all candidates:  {:?}", candidate_regions(&weighted, 3, None));
    let west = CardinalDirection::single(Cardinal::West);
    println!("moving West:     {:?}", candidate_regions(&weighted, 3, Some(west)));
}
