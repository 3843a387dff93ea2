//! US location lookup: free-text profile location to census region, metro
//! class and median-income bracket.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use super::{DemographicsError, IncomeBracket, MetroClass, Region};

pub const NATIONAL_MEDIAN_INCOME_2018: u64 = 63_179;

const BUNDLED_REGIONS: &str = include_str!("../../../../data/state_regions.csv");

const STATE_NAMES: [(&str, &str); 51] = [
    ("alabama", "AL"), ("alaska", "AK"), ("arizona", "AZ"), ("arkansas", "AR"),
    ("california", "CA"), ("colorado", "CO"), ("connecticut", "CT"), ("delaware", "DE"),
    ("district of columbia", "DC"), ("florida", "FL"), ("georgia", "GA"), ("hawaii", "HI"),
    ("idaho", "ID"), ("illinois", "IL"), ("indiana", "IN"), ("iowa", "IA"), ("kansas", "KS"),
    ("kentucky", "KY"), ("louisiana", "LA"), ("maine", "ME"), ("maryland", "MD"),
    ("massachusetts", "MA"), ("michigan", "MI"), ("minnesota", "MN"), ("mississippi", "MS"),
    ("missouri", "MO"), ("montana", "MT"), ("nebraska", "NE"), ("nevada", "NV"),
    ("new hampshire", "NH"), ("new jersey", "NJ"), ("new mexico", "NM"), ("new york", "NY"),
    ("north carolina", "NC"), ("north dakota", "ND"), ("ohio", "OH"), ("oklahoma", "OK"),
    ("oregon", "OR"), ("pennsylvania", "PA"), ("rhode island", "RI"), ("south carolina", "SC"),
    ("south dakota", "SD"), ("tennessee", "TN"), ("texas", "TX"), ("utah", "UT"),
    ("vermont", "VT"), ("virginia", "VA"), ("washington", "WA"), ("west virginia", "WV"),
    ("wisconsin", "WI"), ("wyoming", "WY"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
struct City {
    zip: String,
    county_fips: Option<String>,
}

/// Lookup tables keyed by normalized `(city, state)`, zip, county FIPS and
/// state abbreviation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoTable {
    cities: HashMap<(String, String), City>,
    incomes: HashMap<String, u64>,
    rucc: HashMap<String, u8>,
    regions: HashMap<String, Region>,
}

/// Lookup result; a field is `None` when its table has no entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub region: Option<Region>,
    pub metro_class: Option<MetroClass>,
    pub income_bracket: Option<IncomeBracket>,
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '.' | '\''))
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Two-letter uppercase abbreviation for a state name or abbreviation.
fn state_code(s: &str) -> Option<String> {
    let n = normalize(s);
    if n.len() == 2 && n.chars().all(|c| c.is_ascii_alphabetic()) {
        return Some(n.to_uppercase());
    }
    STATE_NAMES
        .iter()
        .find(|(name, _)| *name == n)
        .map(|(_, code)| code.to_string())
}

fn records(
    text: &str,
    what: &'static str,
    header: &[&str],
) -> Result<Vec<(usize, csv::StringRecord)>, DemographicsError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| DemographicsError::Row {
            what,
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if found.len() < header.len() || found.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(DemographicsError::Header {
            what,
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| DemographicsError::Row {
            what,
            line: idx + 2,
            message: e.to_string(),
        })?;
        if row.len() < header.len() {
            return Err(DemographicsError::Row {
                what,
                line: idx + 2,
                message: format!("expected {} columns", header.len()),
            });
        }
        out.push((idx + 2, row));
    }
    Ok(out)
}

impl GeoTable {
    /// Builds the table from CSV text:
    /// cities `city,state,zip[,county_fips]`, incomes `zip,median_income`,
    /// RUCC `county_fips,state,rucc_code` and regions `state,region`.
    pub fn from_csv(
        cities: &str,
        incomes: &str,
        rucc: &str,
        regions: &str,
    ) -> Result<Self, DemographicsError> {
        let mut t = Self::default();
        for (line, r) in records(cities, "cities", &["city", "state", "zip"])? {
            let state = state_code(&r[1]).ok_or_else(|| DemographicsError::Row {
                what: "cities",
                line,
                message: format!("unknown state {:?}", &r[1]),
            })?;
            let county_fips = r.get(3).filter(|s| !s.is_empty()).map(String::from);
            t.cities.insert(
                (normalize(&r[0]), state),
                City {
                    zip: r[2].to_string(),
                    county_fips,
                },
            );
        }
        for (line, r) in records(incomes, "incomes", &["zip", "median_income"])? {
            let v: u64 = r[1]
                .parse()
                .ok()
                .filter(|v| *v > 0)
                .ok_or_else(|| DemographicsError::Row {
                    what: "incomes",
                    line,
                    message: format!("median_income {:?} must be a positive integer", &r[1]),
                })?;
            t.incomes.insert(r[0].to_string(), v);
        }
        for (line, r) in records(rucc, "rucc", &["county_fips", "state", "rucc_code"])? {
            let code: u8 = r[2]
                .parse()
                .ok()
                .filter(|c| (1..=9).contains(c))
                .ok_or_else(|| DemographicsError::Row {
                    what: "rucc",
                    line,
                    message: format!("rucc_code {:?} must be in 1..=9", &r[2]),
                })?;
            t.rucc.insert(r[0].to_string(), code);
        }
        t.regions = parse_regions(regions)?;
        Ok(t)
    }

    /// Like [`from_csv`](Self::from_csv) with the bundled census regions.
    pub fn with_bundled_regions(
        cities: &str,
        incomes: &str,
        rucc: &str,
    ) -> Result<Self, DemographicsError> {
        Self::from_csv(cities, incomes, rucc, BUNDLED_REGIONS)
    }

    /// Reads the four CSV files; `regions` defaults to the bundled table.
    pub fn load(
        cities: &Path,
        incomes: &Path,
        rucc: &Path,
        regions: Option<&Path>,
    ) -> Result<Self, DemographicsError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| DemographicsError::io(p, e));
        let regions = match regions {
            Some(p) => read(p)?,
            None => BUNDLED_REGIONS.to_string(),
        };
        Self::from_csv(&read(cities)?, &read(incomes)?, &read(rucc)?, &regions)
    }

    pub fn region(&self, state: &str) -> Option<Region> {
        self.regions.get(&state_code(state)?).copied()
    }
}

fn parse_regions(text: &str) -> Result<HashMap<String, Region>, DemographicsError> {
    let mut out = HashMap::new();
    for (line, r) in records(text, "regions", &["state", "region"])? {
        let region = r[1].parse().map_err(|message| DemographicsError::Row {
            what: "regions",
            line,
            message,
        })?;
        let state = state_code(&r[0]).ok_or_else(|| DemographicsError::Row {
            what: "regions",
            line,
            message: format!("unknown state {:?}", &r[0]),
        })?;
        out.insert(state, region);
    }
    Ok(out)
}

pub fn metro_class(rucc_code: u8) -> MetroClass {
    if (1..=3).contains(&rucc_code) {
        MetroClass::Metro
    } else {
        MetroClass::NonMetro
    }
}

pub fn income_bracket(median: u64, national_median: u64) -> IncomeBracket {
    match median.cmp(&national_median) {
        Ordering::Greater => IncomeBracket::Above,
        Ordering::Equal => IncomeBracket::Equal,
        Ordering::Less => IncomeBracket::Below,
    }
}

/// Matches `"City, ST"` (or a full state name, optionally followed by a
/// country) against the city table. `None` means unmatched.
pub fn locate(location: &str, geo: &GeoTable, national_median: u64) -> Option<Location> {
    let mut parts: Vec<&str> = location.split(',').map(str::trim).collect();
    while parts.len() > 2
        && matches!(normalize(parts[parts.len() - 1]).as_str(), "usa" | "us" | "united states")
    {
        parts.pop();
    }
    let [city, state] = parts.as_slice() else {
        return None;
    };
    let state = state_code(state)?;
    let entry = geo.cities.get(&(normalize(city), state.clone()))?;
    let metro = entry
        .county_fips
        .as_ref()
        .and_then(|f| geo.rucc.get(f))
        .map(|&c| metro_class(c));
    let income = geo
        .incomes
        .get(&entry.zip)
        .map(|&m| income_bracket(m, national_median));
    Some(Location {
        region: geo.regions.get(&state).copied(),
        metro_class: metro,
        income_bracket: income,
    })
}
