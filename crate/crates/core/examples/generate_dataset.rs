//! Build data sets piece by piece: dictionary, pattern, signals, noise.
//!
//! cargo run --release --example generate_dataset

use tvsbl::signal_gen::{
    add_noise, derive_seed, gen_dictionary, gen_pattern, gen_signals, noise_variance_for,
};
use tvsbl::{SparsityClass, SparsityPattern};

fn main() -> tvsbl::Result<()> {
    let seed = 2024;
    let a = gen_dictionary(20, 150, derive_seed(seed, 1))?;

    for class in SparsityClass::ALL {
        let pattern = gen_pattern(class, 150, derive_seed(seed, 2))?;
        println!("{class:<12} blocks {:?}", pattern.blocks());
    }

    // a hand-made pattern: one long block and two isolated rows
    let pattern = SparsityPattern::new(vec![(40, 6), (90, 1), (120, 1)], 150)?;
    let truth = gen_signals(&pattern, 5, pattern.support_size(), derive_seed(seed, 3))?;
    for snr in [0.0, 10.0, 20.0] {
        let y = add_noise(&a, &truth, snr, derive_seed(seed, 4))?;
        let clean = a.matrix() * &truth.x;
        let measured = 10.0 * (clean.norm_squared() / (y.y() - &clean).norm_squared()).log10();
        println!(
            "SNR {snr:>4} dB: λ = {:.3e} (formula {:.3e}), realized on this one draw {measured:.2} dB",
            y.noise_variance(),
            noise_variance_for(&a, &truth.support, snr)?
        );
    }
    Ok(())
}
