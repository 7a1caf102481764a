//! Minimal end-to-end use of the library: compress a short series, evaluate
//! a statistic on the compressed form, and print the guaranteed bound.

use segbound::compress::{compress, SegmentationSpec};
use segbound::engine::{eval_approx, parse};
use segbound::store::Catalog;
use segbound::TimeSeries;

fn main() -> segbound::Result<()> {
    let mut catalog = Catalog::new();
    let series = TimeSeries::new("T1", 1, vec![0.2, 0.4, 0.4, 0.5, 0.6])?;
    let spec = SegmentationSpec::parse("sliding:0.5")?;
    catalog.insert_compressed(compress(&series, "p1", &spec)?);
    catalog.insert_raw(series);

    let answer = eval_approx(&parse("Mu(T1)")?, &catalog)?;
    println!("{} ± {}", answer.value, answer.guarantee); // bound holds always
    Ok(())
}
