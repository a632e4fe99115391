//! Links that own several consecutive slots per period collapse to one
//! effective loss probability; the per-period schedule must fit all hops.
//!
//!     cargo run --example slot_merging

use multihop_aoi::{expected_age, merge_slots, validate_path, LinkBudget};

fn main() {
    // per-slot loss and slot count for each of three links
    let budgets = [(0.9, 2), (0.4, 1), (0.6, 3)];
    let merged: Vec<f64> = budgets
        .iter()
        .map(|&(p, l)| merge_slots(LinkBudget::new(p, l).unwrap()))
        .collect();
    let slots: u32 = budgets.iter().map(|b| b.1).sum();
    println!("effective loss per link: {merged:?} ({slots} slots used)");

    let path = validate_path(&merged, Some(7)).unwrap();
    println!("mean age with 7 slots per period: {:.4}", expected_age(&path));

    match validate_path(&merged, Some(2)) {
        Ok(_) => println!("unexpectedly feasible"),
        Err(e) => println!("2 slots per period: {e}"),
    }
}
