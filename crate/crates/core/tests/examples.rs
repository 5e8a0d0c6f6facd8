// each example is compiled as a module so its run_example can be called
#[path = "../examples/action_geometry.rs"]
mod action_geometry;
#[path = "../examples/airy_matching.rs"]
mod airy_matching;
#[path = "../examples/caustic_scan.rs"]
mod caustic_scan;
#[path = "../examples/empirical_measure.rs"]
mod empirical_measure;
#[path = "../examples/legendre_values.rs"]
mod legendre_values;
#[path = "../examples/special_functions.rs"]
mod special_functions;

#[test]
fn legendre_values_runs() {
    legendre_values::run_example().expect("legendre example should run");
}

#[test]
fn action_geometry_runs() {
    action_geometry::run_example().expect("geometry example should run");
}

#[test]
fn caustic_scan_runs() {
    caustic_scan::run_example().expect("scan example should run");
}

#[test]
fn airy_matching_runs() {
    airy_matching::run_example().expect("matching example should run");
}

#[test]
fn empirical_measure_runs() {
    empirical_measure::run_example().expect("measure example should run");
}

#[test]
fn special_functions_runs() {
    special_functions::run_example().expect("special function example should run");
}
