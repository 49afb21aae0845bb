use seqtest::fbp::{solve_vi, Grid2D, SolveParams, payoff};
use seqtest::model::builtin_bessel;

fn main() {
    let model: seqtest::Model = builtin_bessel(3.0, 4.0).unwrap();
    let grid: seqtest::Grid = Grid2D::regular(0.25, 6.0, 201, -2.0, 2.0, 401, true).unwrap();
    let surf = solve_vi(&model, &grid, &SolveParams::default()).unwrap();
    let ix = grid.x_nodes.iter().position(|&x| (x - 2.5438659081651096f64).abs() < 1e-9).unwrap();
    let x = grid.x_nodes[ix];
    println!("row ix={ix} x={x}");
    for ju in 0..12 {
        let u = grid.logphi_nodes[ju];
        let gap = payoff(u) - surf.at(ix, ju);
        println!("  u={:+.4} gap={:+.6e}", u, gap);
    }
    // also near the middle
    for ju in 195..206 {
        let u = grid.logphi_nodes[ju];
        let gap = payoff(u) - surf.at(ix, ju);
        println!("  u={:+.4} gap={:+.6e}", u, gap);
    }
}
