use std::time::Instant;
use num_bigint::BigInt;
use wittdec::field::NumberField;
use wittdec::witt::{adim, prime_support, DiagonalForm};
use wittdec::aniso::{reduce_high, reduce_adim3, binary_part};

#[test]
#[ignore]
fn profile() {
    let k = NumberField::quadratic(BigInt::from(2)).unwrap();
    let coeffs: Vec<_> = ["-20-17*t", "2-8*t", "23+17*t", "-27+14*t", "18-27*t", "-23+3*t", "26+29*t"]
        .iter().map(|s| k.parse_elt(s).unwrap()).collect();
    let q = DiagonalForm::new(&k, coeffs).unwrap();
    let t = Instant::now();
    println!("support: {:?} [{:?}]", prime_support(&q).unwrap().iter().map(|p| p.display()).collect::<Vec<_>>(), t.elapsed());
    let a = adim(&q).unwrap();
    println!("adim = {a} [{:?}]", t.elapsed());
    let mut cur = q.clone();
    let mut level = a;
    while level >= 4 {
        let al = reduce_high(&cur, level).unwrap();
        println!("reduce_high alpha = {} [{:?}]", k.print_elt(&al), t.elapsed());
        cur = cur.extend(&k.neg(&al));
        level = adim(&cur).unwrap();
        println!("new adim = {level} [{:?}]", t.elapsed());
    }
    if level == 3 {
        let al = reduce_adim3(&cur).unwrap();
        println!("reduce_adim3 alpha coords bits = {:?} [{:?}]",
            al.coeffs.iter().map(|c| c.numer().bits()).collect::<Vec<_>>(), t.elapsed());
        cur = cur.extend(&k.neg(&al));
        level = adim(&cur).unwrap();
        println!("new adim = {level} [{:?}]", t.elapsed());
    }
    if level == 2 {
        let out = binary_part(&cur).unwrap();
        println!("binary coords bits = {:?} [{:?}]",
            out.form.coeffs.iter().map(|c| c.coeffs[0].numer().bits()).collect::<Vec<_>>(), t.elapsed());
    }
    println!("TOTAL {:?}", t.elapsed());
}
