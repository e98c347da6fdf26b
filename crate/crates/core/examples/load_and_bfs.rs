// Parse a TSV edge list and run capped breadth-first searches both ways.

use globalness::graph::{bfs_hops, read_edges, Direction};

const EDGES: &str = "\
# source\ttarget
hub\talice
alice\tbob
bob\tcarol
carol\thub
dave\thub
alice\talice
hub\talice
";

pub fn run_example() -> globalness::Result<()> {
    let (g, stats) = read_edges(EDGES.as_bytes(), "inline")?;
    println!(
        "{} nodes, {} edges ({} duplicate, {} self-loop dropped)",
        g.node_count(),
        g.edge_count(),
        stats.duplicates_dropped,
        stats.self_loops_dropped
    );
    let hub = g.require("hub")?;
    let out = bfs_hops(&g, hub, Direction::Outward, 15)?;
    let inw = bfs_hops(&g, hub, Direction::Inward, 15)?;
    println!("node\tfrom hub\tto hub");
    for v in g.nodes() {
        let show = |h: Option<u32>| h.map_or("-".to_owned(), |h| h.to_string());
        println!("{}\t{}\t{}", g.id(v), show(out.get(v)), show(inw.get(v)));
    }
    let capped = bfs_hops(&g, hub, Direction::Outward, 1)?;
    println!("within one hop: {} nodes", capped.reached());
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
