fn main() {
    let t = charsums::dickman::build_rho(25.0, 1e-4).unwrap();
    // anchors rho(k) and midpoints rho(k+1/2)
    for k in 2..=25 {
        let u = k as f64;
        println!("rho({u}) = {:.17e}", t.rho(u).unwrap());
    }
    let deep = charsums::dickman::build_rho(160.0, 1e-3).unwrap();
    for &u in &[30.0, 50.0, 80.0, 100.0, 120.0, 130.0, 140.0, 150.0, 159.0] {
        println!("deep rho({u}) = {:e}", deep.rho(u).unwrap());
    }
    println!("deep clamped = {}", deep.clamped());
}
