//! Common vector of three 3-D vectors, and how far each input sits from it
//! compared with the plain average.
//!
//! ```text
//! cargo run --example toy_common_vector
//! ```

use commonbg::cva::{average_vector, bank_basis, common_vector, discriminative_common_vector, DEFAULT_DROP_TOL};
use commonbg::Frame;

fn dist(a: &Frame, b: &Frame) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn main() -> commonbg::Result<()> {
    let bank = vec![
        Frame::from_vec(vec![1.0, 1.0, 1.0])?,
        Frame::from_vec(vec![1.0, 1.0, -1.0])?,
        Frame::from_vec(vec![1.0, 5.0, 5.0])?,
    ];
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL)?;
    for (i, z) in basis.vectors().enumerate() {
        println!("z{} = {z:?}", i + 1);
    }
    let com = common_vector(&bank, &basis, 0)?;
    let ave = average_vector(&bank)?;
    println!("common  = {:?}", com.as_frame().as_slice());
    println!("average = {:.4?}", ave.as_slice());

    println!("\n{:>12} {:>10} {:>10}", "vector", "to common", "to average");
    for (i, a) in bank.iter().enumerate() {
        println!(
            "{:>12} {:>10.4} {:>10.4}",
            format!("a{}", i + 1),
            dist(a, com.as_frame()),
            dist(a, &ave)
        );
    }

    // only the component orthogonal to the difference subspace survives
    let test = Frame::from_vec(vec![3.0, -2.0, 7.0])?;
    let dcv = discriminative_common_vector(&test, &basis)?;
    println!("\nresidual of {:?} = {:?}", test.as_slice(), dcv.as_frame().as_slice());
    Ok(())
}
