use std::io::{self, Write};
use std::path::Path;

use super::{ReadStore, SeqError};

pub const FASTA_LINE_WIDTH: usize = 80;

pub fn fasta_read(path: impl AsRef<Path>) -> Result<ReadStore, SeqError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SeqError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_fasta(&text)
}

/// Parses FASTA text; ids follow record order. Wrapped sequence lines are
/// joined and bases upper-cased.
pub fn parse_fasta(text: &str) -> Result<ReadStore, SeqError> {
    let mut store = ReadStore::new();
    let mut current: Option<(usize, String, Vec<u8>)> = None;
    let flush = |store: &mut ReadStore, rec: Option<(usize, String, Vec<u8>)>| -> Result<(), SeqError> {
        if let Some((line, header, seq)) = rec {
            if seq.is_empty() {
                return Err(SeqError::Parse { line, message: format!("record {header:?} has no sequence") });
            }
            store.push(store.len(), header, &seq)?;
        }
        Ok(())
    };
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let header = header.trim();
            if header.is_empty() {
                return Err(SeqError::Parse { line: n + 1, message: "empty header".into() });
            }
            flush(&mut store, current.take())?;
            current = Some((n + 1, header.to_string(), Vec::new()));
        } else {
            match current.as_mut() {
                Some((_, _, seq)) => seq.extend(line.bytes().filter(|b| !b.is_ascii_whitespace())),
                None => return Err(SeqError::Parse { line: n + 1, message: "sequence before first header".into() }),
            }
        }
    }
    flush(&mut store, current)?;
    Ok(store)
}

/// Writes records with sequences wrapped at [`FASTA_LINE_WIDTH`].
pub fn write_fasta<'a, W: Write>(
    mut w: W,
    records: impl IntoIterator<Item = (&'a str, &'a [u8])>,
) -> io::Result<()> {
    for (header, seq) in records {
        writeln!(w, ">{header}")?;
        for chunk in seq.chunks(FASTA_LINE_WIDTH) {
            w.write_all(chunk)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_records() {
        let s = parse_fasta(">r0\nAGAACT\n>r1\nAACTGAAG").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.read_len(0).unwrap(), 6);
        assert_eq!(s.read_len(1).unwrap(), 8);
    }

    #[test]
    fn empty_text_is_empty_store() {
        assert!(parse_fasta("").unwrap().is_empty());
    }

    #[test]
    fn wrapped_lowercase_with_description() {
        let s = parse_fasta(">read_a some description\r\nacg\r\nTTA\n\n>b\nC\n").unwrap();
        assert_eq!(s.seq(0).unwrap(), b"ACGTTA");
        assert_eq!(s.header(0).unwrap(), "read_a some description");
        assert_eq!(s.name(0).unwrap(), "read_a");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_fasta(">r0\nACGNT\n"), Err(SeqError::Alphabet { ref record, base: 'N', .. }) if record == "r0"));
        assert!(matches!(parse_fasta("ACGT\n"), Err(SeqError::Parse { line: 1, .. })));
        assert!(matches!(parse_fasta(">r0\n>r1\nAC\n"), Err(SeqError::Parse { line: 1, .. })));
        assert!(matches!(parse_fasta(">\nAC\n"), Err(SeqError::Parse { .. })));
    }

    #[test]
    fn writer_wraps_at_80() {
        let seq = vec![b'A'; 170];
        let mut out = Vec::new();
        write_fasta(&mut out, [("contig_0 len=170 reads=3", seq.as_slice())]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lens: Vec<_> = text.lines().map(str::len).collect();
        assert_eq!(lens, vec![25, 80, 80, 10]);
        let back = parse_fasta(&text).unwrap();
        assert_eq!(back.seq(0).unwrap(), seq.as_slice());
    }
}
