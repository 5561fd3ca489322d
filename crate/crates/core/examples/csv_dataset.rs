//! Export a simulated dataset as CSV plus a JSON sidecar, then read it back.

use std::fs::File;

use survnet::datasets::{generate, load_csv, write_csv, write_sidecar, SimScheme, SimSpec, TargetColumn, Task};

pub fn main() -> survnet::Result<()> {
    let spec = SimSpec { scheme: SimScheme::IndepMeanShift, n: 100, p: 10, p_prime: 2, seed: 5 };
    let data = generate(&spec)?;
    let dir = std::env::temp_dir().join("survnet-csv-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("dataset1.csv");
    write_csv(File::create(&path)?, &data)?;
    write_sidecar(File::create(path.with_extension("json"))?, &data, Some(&spec))?;

    let back = load_csv(&path, &TargetColumn::Name("y".into()), true, Task::Classification)?;
    println!("{} rows, {} columns: {:?}", back.n_rows(), back.n_cols(), back.column_names);
    println!("round trip exact: {}", back.x == data.x && back.target == data.target);
    println!("sidecar:\n{}", std::fs::read_to_string(path.with_extension("json"))?);
    Ok(())
}
