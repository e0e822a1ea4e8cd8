use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GtRecord {
    pub frame_index: usize,
    pub object_id: u32,
    pub bbox: BBox,
}

/// Per-frame object boxes.
///
/// Text form is one record per line: `frame_index object_id x y w h`,
/// whitespace separated, `#` starts a comment. Track streams carry an extra
/// status token in third position (`frame track status x y w h`); those
/// parse too, with `lost` records dropped, so tracker output can be scored
/// or diffed as ground truth.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    records: Vec<GtRecord>,
}

impl GroundTruth {
    pub fn new(mut records: Vec<GtRecord>) -> Self {
        records.sort();
        GroundTruth { records }
    }

    pub fn records(&self) -> &[GtRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn in_frame(&self, frame_index: usize) -> impl Iterator<Item = &GtRecord> {
        let start = self.records.partition_point(|r| r.frame_index < frame_index);
        self.records[start..]
            .iter()
            .take_while(move |r| r.frame_index == frame_index)
    }

    pub fn by_frame(&self) -> BTreeMap<usize, Vec<BBox>> {
        let mut out: BTreeMap<usize, Vec<BBox>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.frame_index).or_default().push(r.bbox);
        }
        out
    }

    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        for r in &self.records {
            if r.bbox.area() == 0 || r.bbox.right() > width || r.bbox.bottom() > height {
                return Err(Error::format(
                    "ground truth",
                    format!("box {:?} of object {} outside {width}x{height}", r.bbox, r.object_id),
                ));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let nums: Vec<&str> = match toks.len() {
                6 => toks,
                7 => {
                    if toks[2] == "lost" {
                        continue;
                    }
                    if toks[2] != "active" && !toks[2].starts_with("occluded") {
                        return Err(Error::format(
                            "ground truth",
                            format!("line {}: unknown status {:?}", lineno + 1, toks[2]),
                        ));
                    }
                    [&toks[..2], &toks[3..]].concat()
                }
                n => {
                    return Err(Error::format(
                        "ground truth",
                        format!("line {}: expected 6 fields, found {n}", lineno + 1),
                    ))
                }
            };
            let parse = |s: &str| -> Result<u64> {
                s.parse().map_err(|_| {
                    Error::format("ground truth", format!("line {}: bad integer {s:?}", lineno + 1))
                })
            };
            let v = nums.iter().map(|s| parse(s)).collect::<Result<Vec<u64>>>()?;
            let to_u32 = |x: u64| -> Result<u32> {
                u32::try_from(x).map_err(|_| {
                    Error::format("ground truth", format!("line {}: value too large", lineno + 1))
                })
            };
            records.push(GtRecord {
                frame_index: v[0] as usize,
                object_id: to_u32(v[1])?,
                bbox: BBox::new(to_u32(v[2])?, to_u32(v[3])?, to_u32(v[4])?, to_u32(v[5])?),
            });
        }
        Ok(GroundTruth::new(records))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GroundTruth::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let b = r.bbox;
            let _ = writeln!(out, "{} {} {} {} {} {}", r.frame_index, r.object_id, b.x, b.y, b.w, b.h);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_status_lines() {
        let text = "# header\n0 1 10 20 30 40\n1 2 active 1 2 3 4\n1 3 occluded:2 5 5 5 5\n2 2 lost 1 1 1 1\n";
        let gt = GroundTruth::parse(text).unwrap();
        assert_eq!(gt.len(), 3);
        assert_eq!(gt.in_frame(1).count(), 2);
        assert_eq!(gt.records()[0].bbox, BBox::new(10, 20, 30, 40));
    }

    #[test]
    fn text_round_trip() {
        let gt = GroundTruth::new(vec![
            GtRecord { frame_index: 3, object_id: 2, bbox: BBox::new(1, 2, 3, 4) },
            GtRecord { frame_index: 0, object_id: 1, bbox: BBox::new(5, 6, 7, 8) },
        ]);
        assert_eq!(GroundTruth::parse(&gt.to_text()).unwrap(), gt);
    }

    #[test]
    fn rejects_short_lines_and_bad_numbers() {
        assert!(GroundTruth::parse("0 1 2 3 4").is_err());
        assert!(GroundTruth::parse("0 1 2 3 x 5").is_err());
        assert!(GroundTruth::parse("0 1 bogus 3 4 5 6").is_err());
    }

    #[test]
    fn bounds_check() {
        let gt = GroundTruth::parse("0 1 300 0 30 10").unwrap();
        assert!(gt.check_bounds(320, 240).is_err());
        assert!(gt.check_bounds(330, 240).is_ok());
    }
}
