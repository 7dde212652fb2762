//! Run the acceptance suite and print one line per criterion.

fn main() {
    let report = ratsect::experiments::acceptance::run_all();
    for c in &report.criteria {
        println!("{}", c.line());
    }
    std::process::exit(if report.pass { 0 } else { 2 });
}
