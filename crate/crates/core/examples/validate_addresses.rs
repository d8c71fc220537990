//! Validate Bitcoin addresses and show canonical re-encoding.
//!
//! cargo run --example validate_addresses -- [ADDRESS...]

use ransomtrace::addr::{validate, Address, ScriptKind};

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = [
            "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa",
            "3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy",
            "BC1QW508D6QEJXTDG4Y5R3ZARVARY0C5XW7KV8F3T4",
            "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNb",
            "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t5",
            "bc1pw508d6qejxtdg4y5r3zarvary0c5xw7kw508d6qejxtdg4y5r3zarvary0c5xw7kt5nd6y",
            "hello",
        ]
        .map(String::from)
        .to_vec();
    }
    for s in &inputs {
        match validate(s) {
            Ok(a) => println!("ok      {s}\n        -> {a} ({:?}, {:?})", a.encoding(), a.script_kind()),
            Err(e) => println!("reject  {s}\n        -> {} ({e})", e.rule()),
        }
    }

    let a = Address::from_payload(ScriptKind::P2WSH, &[7u8; 32]).expect("32-byte payload");
    assert_eq!(validate(&a.encode()).unwrap(), a);
    println!("\nbuilt from payload: {a}");
}
