//! Dump the fixed-width records for a pattern's segments.

use packmatch::{encoding_width, Alphabet, Code, MpAutomaton, PackedString, SegmentAutomaton, SegmentEncoding};

fn main() -> packmatch::Result<()> {
    let word = std::env::args().nth(1).unwrap_or_else(|| "ababca".into());
    let r: usize = std::env::args().nth(2).map_or(4, |s| s.parse().expect("r"));
    let codes: Vec<Code> = word.bytes().map(|b| Code::from(b - b'a')).collect();
    let sigma = u32::from(*codes.iter().max().expect("nonempty pattern")) + 1;
    let alphabet = Alphabet::new(sigma.max(2))?;

    let sa = SegmentAutomaton::build(MpAutomaton::build(&PackedString::pack(&codes, alphabet)?)?, r)?;
    println!("{word}, r = {r}, sigma = {}: {} bits per record", alphabet.sigma(), encoding_width(r, alphabet)?);
    for i in 0..sa.segments().len() {
        let enc = SegmentEncoding::encode(&sa, i)?;
        let desc = enc.decode()?;
        println!("segment {i}: {}", enc.bits().to_bit_string());
        println!(
            "  size {} first {} accepting {} heavy forward {:?}",
            desc.size, desc.first_segment, desc.accepting, desc.heavy_forward
        );
        println!("  labels {:?}", desc.labels);
        println!(
            "  light failures {:?}, differences {:?} ({} of {} B_D bits)",
            desc.light_failures().collect::<Vec<_>>(),
            desc.differences(),
            enc.used_b_d_bits()?,
            enc.layout().diff_capacity()
        );
    }
    Ok(())
}
