use brioschi::*;
use brioschi::coeff::Coeff;

fn z1(n: u32) -> Series2 { Series2::var(0, n) }
fn z2(n: u32) -> Series2 { Series2::var(1, n) }

fn main() {
    let n = 14;
    let w = SymDiff2::new(
        z1(n),
        Series2::zero(n),
        Series2::constant(Coeff::from_int(-1), n),
    ).shift(&(Coeff::one(), Coeff::zero()));
    let (phi1, phi2) = w.split_local().unwrap();
    println!("phi1.p = {}", phi1.p);
    println!("phi1.q = {}", phi1.q);
    println!("phi2.p = {}", phi2.p);
    println!("phi2.q = {}", phi2.q);
    let u1 = first_integral(&phi1).unwrap();
    let u2 = first_integral(&phi2).unwrap();
    println!("u1 = {}", u1);
    println!("u2 = {}", u2);
    match w.exact_decomposition() {
        Ok(d) => println!("OK scalar={} F1={}…", d.scalar, d.f1),
        Err(e) => println!("ERR: {e}"),
    }
}
