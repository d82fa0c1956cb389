use packmatch::{Alphabet, PackedString};

fn main() -> packmatch::Result<()> {
    for sigma in [2, 4, 5, 26, 256] {
        let a = Alphabet::new(sigma)?;
        println!("sigma {sigma:>3}: {} bits per character, {} per word", a.bits_per_char(), a.chars_per_word());
    }

    let dna = Alphabet::dna();
    let codes: Vec<u16> = (0..40).map(|i| (i * 7 % 4) as u16).collect();
    let s = PackedString::pack(&codes, dna)?;
    println!("{} characters in {} words: {:#018x?}", s.len(), s.words().len(), s.words());

    // a window straddling the word boundary at character 32
    let w = s.extract_window(29, 7)?;
    println!("window [29, 36): bits {:#06x}, codes {:?}", w.bits, w.codes(dna.bits_per_char()));
    assert_eq!(w.codes(2), &codes[29..36]);

    let tail = s.slice(30, 40)?;
    println!("slice [30, 40): {:?}", tail.unpack());
    println!("char_at(40) -> {}", s.char_at(40).unwrap_err());
    Ok(())
}
