fn main() {
    println!("locbound");
}
