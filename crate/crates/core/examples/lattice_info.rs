//! Generators, duals, shortest vectors and the window separation check.
//!
//! `cargo run --example lattice_info`

use wfsample::lattice::{check_separation, direction_grid, direction_grid_gap, shortest_vector, Cone, Lattice};
use wfsample::localize::{Window, WindowSpec};

fn main() -> wfsample::Result<()> {
    let window = Window::new(WindowSpec::default(), 2)?;
    let rho = window.support_radius();
    let lattices = [
        ("Z^2", Lattice::integer(2)),
        ("0.7 Z^2", Lattice::integer(2).scaled(0.7)?),
        ("hexagonal", Lattice::hexagonal()),
        ("3 Z^2", Lattice::integer(2).scaled(3.0)?),
    ];
    for (name, l) in &lattices {
        let sv = shortest_vector(l)?;
        let sd = shortest_vector(&l.dual())?;
        let sep = check_separation(l, rho)?;
        println!(
            "{name:<10} covolume {:.4}  shortest {:.4}  dual shortest {:.4}  separated {}",
            l.covolume(),
            sv.norm,
            sd.norm,
            sep.separated
        );
    }

    let hex = Lattice::hexagonal();
    let cone = Cone::new(&[1.0, 0.0], 15f64.to_radians())?;
    let pts = hex.enumerate_in_cone(&cone, 8.0, 64.0)?;
    println!("hexagonal points in a 15 degree cone, 8 <= |mu| <= 64: {}", pts.len());

    let dirs = direction_grid(2, 16);
    println!("16 directions, max gap {:.4} rad, first {:?}", direction_grid_gap(2, 16), dirs[1]);
    Ok(())
}
