use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    BobDeparture,
    EveDeparture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "event_time")]
    pub time: f64,
    #[serde(rename = "event_kind")]
    pub kind: EventKind,
    pub packet_id: u64,
    pub generation_time: f64,
}

/// Writes `event_time,event_kind,packet_id,generation_time` rows with a
/// header line.
pub fn write_events_csv<W: Write>(events: &[Event], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let events = [
            Event {
                time: 0.5,
                kind: EventKind::Arrival,
                packet_id: 0,
                generation_time: 0.5,
            },
            Event {
                time: 1.25,
                kind: EventKind::BobDeparture,
                packet_id: 0,
                generation_time: 0.5,
            },
            Event {
                time: 2.0,
                kind: EventKind::EveDeparture,
                packet_id: 0,
                generation_time: 0.5,
            },
        ];
        let mut buf = Vec::new();
        write_events_csv(&events, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "event_time,event_kind,packet_id,generation_time\n\
             0.5,arrival,0,0.5\n\
             1.25,bob_departure,0,0.5\n\
             2.0,eve_departure,0,0.5\n"
        );
    }
}
