//! Operation counts of the two eigendecomposition routes, and measured time
//! for the eigendecomposition step on a small grid of sizes.
//!
//! `cargo run --release --example flop_comparison`

use krein::harness::{bench, flops_table, BenchConfig};

fn main() -> krein::Result<()> {
    println!("{:>9} {:>6} {:>16} {:>16} {:>6}", "n", "m", "one-shot", "squared", "ratio");
    for row in flops_table(&[10_000, 100_000, 1_000_000], &[100, 1000]) {
        println!(
            "{:>9} {:>6} {:>16.4e} {:>16.4e} {:>6.3}",
            row.n,
            row.m,
            row.one_shot as f64,
            row.sgt as f64,
            row.one_shot as f64 / row.sgt as f64
        );
    }

    let report = bench(&BenchConfig {
        ns: vec![1000, 2000, 4000],
        ms: vec![100],
        repetitions: 5,
        ..BenchConfig::default()
    })?;
    println!();
    println!("{:>6} {:>5} {:>9} {:>12} {:>12}", "n", "m", "method", "median s", "std s");
    for r in &report.rows {
        println!(
            "{:>6} {:>5} {:>9} {:>12.5} {:>12.5}",
            r.n,
            r.m,
            r.method.to_string(),
            r.median_seconds,
            r.std_seconds
        );
    }
    for fit in &report.fits {
        let ratios: Vec<String> = fit.doubling_ratios.iter().map(|(n, t)| format!("{n}→{}: {t:.2}", 2 * n)).collect();
        println!("{}: time doubling ratios {}", fit.method, ratios.join(", "));
    }
    Ok(())
}
