//! Append surrogate null columns and track which columns are still active.

use ndarray::array;
use survnet::surrogate::{augment, ColumnOrigin};

pub fn main() -> survnet::Result<()> {
    let x = array![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]];
    let mut aug = augment(x.view(), 2, 42)?;
    println!("augmented matrix (originals then surrogates):\n{}", aug.matrix());

    // Same multiset of entries, shuffled across rows and columns.
    let mut a: Vec<f64> = x.iter().copied().collect();
    let mut b: Vec<f64> = aug.surrogate_block().iter().copied().collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a, b);

    aug.deactivate(&[0, 3])?;
    let (r, r0) = aug.counts();
    println!("active {:?}: r = {r}, r0 = {r0}", aug.active_ids());
    for id in aug.active_ids() {
        let kind = match aug.origin(id) {
            ColumnOrigin::Original => "original",
            ColumnOrigin::Surrogate => "surrogate",
        };
        println!("  column {id}: {kind}");
    }
    Ok(())
}
