//! Radio energy accounting: transmit cost on both sides of the crossover
//! distance, receive cost, and a node ledger that caps the last debit and
//! records the death.
//!
//! `cargo run --example energy_model`

use holesim::energy::{zone_energy_ratio, Category, EnergyLedger, RadioModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let radio = RadioModel::physical();
    let bits = 4096.0;
    println!("crossover distance d0 = {:.1} m", radio.d0);
    for d in [10.0, 50.0, radio.d0, 150.0] {
        println!("tx {bits} bits over {d:>6.1} m: {:.3e} J", radio.tx_energy(bits, d)?);
    }
    println!("rx {bits} bits: {:.3e} J", radio.rx_energy(bits)?);

    let mut ledger = EnergyLedger::new(1e-3);
    let mut sent = 0;
    while ledger.charge(Category::Tx, radio.tx_energy(bits, 80.0)?)? {
        sent += 1;
    }
    println!(
        "a 1 mJ node manages {sent} full transmissions at 80 m; residual {} J, imbalance {:.1e}",
        ledger.residual(),
        ledger.imbalance()
    );

    // share of cluster energy held by one zone, as the prevention phase sees it
    println!("zone holding 0.4 of 5.0 J: ratio {:.2}", zone_energy_ratio(0.4, 5.0)?);
    Ok(())
}
