//! CSV formats: order events `time,side,delta` (side `b`/`a`), queue paths
//! `time,q_bid,q_ask` and prices `time,price_ticks`.

use crate::error::{Error, Result};
use crate::lob::{OrderEvent, PathSample, PricePath, Side};
use std::io::{Read, Write};

pub fn read_events<R: Read>(reader: R) -> Result<Vec<OrderEvent>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols != ["time", "side", "delta"] {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `time,side,delta`, found `{}`", cols.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let perr = |reason: String| Error::Parse { line, reason };
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        if rec.len() != 3 {
            return Err(perr(format!("expected 3 fields, found {}", rec.len())));
        }
        let time: f64 = rec[0].parse().map_err(|_| perr(format!("bad time `{}`", &rec[0])))?;
        let side = match &rec[1] {
            "b" => Side::Bid,
            "a" => Side::Ask,
            s => return Err(perr(format!("side must be `b` or `a`, found `{s}`"))),
        };
        let delta: f64 = rec[2].parse().map_err(|_| perr(format!("bad delta `{}`", &rec[2])))?;
        let ev = OrderEvent::new(time, side, delta).map_err(|e| perr(e.to_string()))?;
        if time < last {
            return Err(perr(format!("time {time} precedes previous event at {last}")));
        }
        last = time;
        out.push(ev);
    }
    Ok(out)
}

pub fn write_events<W: Write>(mut w: W, events: &[OrderEvent]) -> Result<()> {
    writeln!(w, "time,side,delta")?;
    for ev in events {
        let s = match ev.side {
            Side::Bid => "b",
            Side::Ask => "a",
        };
        writeln!(w, "{},{},{}", ev.time, s, ev.delta)?;
    }
    Ok(())
}

pub fn write_path<W: Write>(mut w: W, samples: &[PathSample]) -> Result<()> {
    writeln!(w, "time,q_bid,q_ask")?;
    for s in samples {
        writeln!(w, "{},{},{}", s.time, s.q_bid, s.q_ask)?;
    }
    Ok(())
}

pub fn write_prices<W: Write>(mut w: W, prices: &PricePath) -> Result<()> {
    writeln!(w, "time,price_ticks")?;
    for (t, p) in prices.steps() {
        writeln!(w, "{t},{p}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let evs = vec![
            OrderEvent::new(0.0, Side::Bid, 1.5).unwrap(),
            OrderEvent::new(0.25, Side::Ask, -2.0).unwrap(),
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &evs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "time,side,delta\n0,b,1.5\n0.25,a,-2\n");
        assert_eq!(read_events(&buf[..]).unwrap(), evs);
    }

    #[test]
    fn negative_time_names_line() {
        let src = "time,side,delta\n0.1,b,1\n-0.5,a,1\n";
        match read_events(src.as_bytes()) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("non-negative"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(read_events("time,side,delta\n1,x,1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_events("time,side,delta\n1,b,abc\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_events("t,s,d\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_events("time,side,delta\n2,b,1\n1,b,1\n".as_bytes()), Err(Error::Parse { line: 3, .. })));
    }
}
