use std::sync::Arc;
use std::time::Instant;
use modw::datum::{build_nilpotent_datum, type_a_nilpotent};
use modw::field::Field;
use modw::ggg::GggModule;
use modw::liealg::build_gl;
use modw::walg::{theorem8_certify, WAlgebra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for partition in [vec![3usize], vec![2, 1]] {
        let f = Field::new(3, 1).unwrap();
        let g = Arc::new(build_gl(3, &f).unwrap());
        let (e, w) = type_a_nilpotent(&g, 3, &partition).unwrap();
        let d = Arc::new(build_nilpotent_datum(g, e, w).unwrap());
        let m = Arc::new(GggModule::build(d.clone(), &d.eta_chi()).unwrap());
        let t0 = Instant::now();
        let w = WAlgebra::build(m.clone()).unwrap();
        println!("{partition:?}: W dim {} tensor {:?}", w.dim, t0.elapsed());
        let t0 = Instant::now();
        let rep = theorem8_certify(&w, &mut rng, 20).unwrap();
        println!("  theorem8 {:?} oracle {} in {:?}", rep.oracle_mode, rep.oracle_dim, t0.elapsed());
    }
}
