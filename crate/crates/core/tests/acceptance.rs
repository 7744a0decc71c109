//! Acceptance criteria A1-A10. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use colparity::capacity::capacity_bits;
use colparity::codec::{
    embed, extract_bits, get_position, text_to_bits, CodecError, EmbedReport, WatermarkBits,
};
use colparity::ledger::{block_hash, ChainEntry, ChainStore, Digest, TamperKind};
use colparity::otsu::{otsu_threshold, otsu_threshold_hist};
use colparity::pnm::{load_pbm, save_pbm, PbmFormat};
use colparity::steganalysis::{acorr_diff, autocorr, parity_sequence};
use colparity::synth::{generate_synthetic, SplitMix64};
use colparity::{pixel_diff, BinaryImage, GrayImage};

use common::*;

/// A1 runtime budget for the whole roundtrip corpus.
const A1_BUDGET: Duration = Duration::from_secs(10);
/// A8: lags examined after lag 0.
const A8_MAX_LAG: usize = 100;
/// A8: no single lag may carry more than this share of the total |diff|.
const A8_MAX_SHARE: f64 = 0.25;
const A8_MIN_PAYLOAD: usize = 1300;

/// SHA-256 of the watermarked golden page (canonical P4) and of its
/// embed report JSON.
const GOLDEN_P4_SHA256: &str = "d5b9835b79d6e8e07be08fe2727b83d2d618e071296d7bc6379422da9a63608a";
const GOLDEN_REPORT_SHA256: &str =
    "8570606fa289753be37359fa1a4e66b009a3fe3bc3da0ec5e13b55be64093930";

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, violations: usize, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass: violations == 0,
        detail,
    }
}

/// One A1 trial with everything A3 and A4 need.
struct Trial {
    original: BinaryImage,
    marked: BinaryImage,
    payload: WatermarkBits,
    report: EmbedReport,
    step: usize,
    extracted: Result<WatermarkBits, CodecError>,
}

fn a1_corpus() -> (Vec<Trial>, Duration) {
    let mut rng = SplitMix64::new(0xA1);
    let steps = [20, 30, 40, 50];
    let mut trials = Vec::with_capacity(500);
    let mut elapsed = Duration::ZERO;
    for i in 0..500u64 {
        let texture = Texture::ALL[(i % 3) as usize];
        let w = rng.uniform(200, 900) as usize;
        let h = rng.uniform(120, 600) as usize;
        let step = steps[(i / 3 % 4) as usize];
        let started = Instant::now();
        let original = texture.page(w, h, 1000 + i);
        let cap = capacity_bits(&original, step).unwrap();
        let n = rng.uniform(0, cap as i64) as usize;
        let payload = WatermarkBits::new(random_bits(&mut rng, n));
        let (marked, report) = embed(&original, &payload, step).expect("payload within capacity");
        let extracted = extract_bits(&marked, n, step);
        elapsed += started.elapsed();
        trials.push(Trial {
            original,
            marked,
            payload,
            report,
            step,
            extracted,
        });
    }
    (trials, elapsed)
}

fn a1(trials: &[Trial], elapsed: Duration) -> Outcome {
    let bad = trials
        .iter()
        .filter(|t| t.extracted.as_ref() != Ok(&t.payload))
        .count();
    let over_budget = elapsed >= A1_BUDGET;
    let detail = format!(
        "{} trials, {bad} mismatches, {:.2}s (budget {}s)",
        trials.len(),
        elapsed.as_secs_f64(),
        A1_BUDGET.as_secs()
    );
    outcome(
        "A1",
        "roundtrip on synthetic corpus",
        bad + over_budget as usize,
        detail,
    )
}

fn a2() -> Outcome {
    let mut violations = 0;
    let mut fit_lines = 0usize;
    for len in 2..=12usize {
        for mask in 0u32..1 << len {
            let line: Vec<u8> = (0..len).map(|i| ((mask >> i) & 1) as u8).collect();
            let n = line.iter().filter(|&&b| b == 1).count();
            let r = get_position(&line);
            // Unfit exactly when fewer than half the pixels are black.
            if r.is_fit() != (2 * n >= len) {
                violations += 1;
                continue;
            }
            let Some(pos) = r.pos() else { continue };
            fit_lines += 1;
            let mut changed = line.clone();
            changed[pos] ^= 1;
            let after = get_position(&changed);
            if !after.is_fit() || after.flag() == r.flag() {
                violations += 1;
            }
        }
    }
    outcome(
        "A2",
        "fitness preserved by every change (S = 2..12)",
        violations,
        format!("{fit_lines} fit lines checked, {violations} violations"),
    )
}

fn a3(trials: &[Trial]) -> Outcome {
    let mut violations = 0;
    let mut columns = 0;
    for t in trials {
        for c in &t.report.consumed {
            columns += 1;
            let n = t
                .marked
                .column_count(c.column_x, c.strip_index * t.step, t.step);
            if (n % 2) as u8 != c.bit {
                violations += 1;
            }
        }
    }
    outcome(
        "A3",
        "consumed column parity equals its bit",
        violations,
        format!("{columns} consumed columns, {violations} violations"),
    )
}

fn a4(trials: &[Trial]) -> Outcome {
    let mut violations = 0;
    let mut toggles = 0;
    for t in trials {
        let diff = pixel_diff(&t.original, &t.marked).unwrap();
        toggles += diff.len();
        if diff != t.report.toggled_positions() || diff.len() != t.report.pixels_toggled {
            violations += 1;
        }
        if diff.len() > t.payload.len() {
            violations += 1;
        }
        for &(x, y) in &diff {
            let inside = t.report.consumed.iter().any(|c| {
                c.column_x == x && y >= c.strip_index * t.step && y < (c.strip_index + 1) * t.step
            });
            if !inside {
                violations += 1;
            }
        }
    }
    outcome(
        "A4",
        "changes confined to consumed columns, at most one per bit",
        violations,
        format!("{toggles} toggled pixels, {violations} violations"),
    )
}

fn a5() -> Outcome {
    let mut rng = SplitMix64::new(0xA5);
    let mut hists: Vec<[u64; 256]> = Vec::new();
    for _ in 0..1000 {
        let mut h = [0u64; 256];
        let fill = rng.uniform(1, 256);
        for _ in 0..fill {
            h[rng.uniform(0, 255) as usize] += rng.uniform(0, 250) as u64;
        }
        if h.iter().all(|&c| c == 0) {
            h[rng.uniform(0, 255) as usize] = 1;
        }
        hists.push(h);
    }
    // Edge cases: constant, two spikes, uniform, two equal clusters.
    for v in [0usize, 128, 255] {
        let mut h = [0u64; 256];
        h[v] = 500;
        hists.push(h);
    }
    for (a, b) in [(0usize, 255usize), (10, 11), (30, 200)] {
        let mut h = [0u64; 256];
        h[a] = 300;
        h[b] = 700;
        hists.push(h);
    }
    hists.push([1; 256]);
    hists.push([200; 256]);
    let mut h = [0u64; 256];
    h[0] = 5;
    h[100] = 5;
    h[200] = 5;
    hists.push(h);

    let mut mismatches = hists
        .iter()
        .filter(|h| otsu_threshold_hist(h) != ref_otsu(h))
        .count();
    // Through the image path as well.
    let constant = GrayImage::from_grid(4, 4, vec![128; 16]).unwrap();
    if otsu_threshold(&constant) != 128 {
        mismatches += 1;
    }
    outcome(
        "A5",
        "Otsu threshold equals exhaustive maximizer",
        mismatches,
        format!("{} histograms, {mismatches} mismatches", hists.len()),
    )
}

fn a6() -> Outcome {
    let mut rng = SplitMix64::new(0xA6);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.uniform(1, 5000) as usize;
        let density = rng.uniform(1, 9);
        let seq: Vec<u8> = (0..n)
            .map(|_| (rng.uniform(0, 9) < density) as u8)
            .collect();
        let max_lag = rng.uniform(0, n as i64 - 1) as usize;
        let got: Vec<u64> = autocorr(&seq, max_lag)
            .unwrap()
            .lags
            .iter()
            .map(|l| l.1)
            .collect();
        if got != ref_autocorr(&seq, max_lag) {
            mismatches += 1;
        }
    }
    outcome(
        "A6",
        "autocorrelation equals naive double loop",
        mismatches,
        format!("200 sequences, {mismatches} mismatches"),
    )
}

fn a7() -> Outcome {
    let mut rng = SplitMix64::new(0xA7);
    let mut failures = 0;
    let mut checks = 0;
    for i in 0..100u64 {
        let texture = Texture::ALL[(i % 3) as usize];
        let w = rng.uniform(200, 800) as usize;
        let h = rng.uniform(150, 500) as usize;
        let img = texture.page(w, h, 7000 + i);
        for step in [20, 30, 40, 50] {
            checks += 1;
            let cap = capacity_bits(&img, step).unwrap();
            let at = WatermarkBits::new(random_bits(&mut rng, cap));
            let past = WatermarkBits::new(random_bits(&mut rng, cap + 1));
            let ok_at = embed(&img, &at, step).is_ok();
            let err_past = matches!(
                embed(&img, &past, step),
                Err(CodecError::Capacity { available, required }) if available == cap && required == cap + 1
            );
            if !(ok_at && err_past) {
                failures += 1;
            }
        }
    }
    outcome(
        "A7",
        "capacity is the exact embedding boundary",
        failures,
        format!("{checks} image/step pairs, {failures} failures"),
    )
}

fn a8() -> Outcome {
    let mut rng = SplitMix64::new(0xA8);
    let mut violations = 0;
    let mut worst_share: f64 = 0.0;
    let mut runs = 0;
    for i in 0..50u64 {
        let strokes = rng.uniform(2000, 3000) as usize;
        let page = generate_synthetic(1763, 2400, strokes, 8000 + i);
        for step in [30, 40, 50] {
            let cap = capacity_bits(&page, step).unwrap();
            if cap < A8_MIN_PAYLOAD {
                // The fixture itself is unfit for this criterion.
                violations += 1;
                continue;
            }
            let n =
                rng.uniform(A8_MIN_PAYLOAD as i64, cap.min(A8_MIN_PAYLOAD + 400) as i64) as usize;
            let wm = WatermarkBits::new(random_bits(&mut rng, n));
            let (marked, report) = embed(&page, &wm, step).unwrap();
            let before = autocorr(&parity_sequence(&page, step).unwrap(), A8_MAX_LAG).unwrap();
            let after = autocorr(&parity_sequence(&marked, step).unwrap(), A8_MAX_LAG).unwrap();
            let diff = acorr_diff(&before, &after).unwrap();
            let tail = &diff[1..];
            let bound = report.pixels_toggled as i64;
            violations += tail.iter().filter(|&&(_, d)| d.abs() > bound).count();
            let total: i64 = tail.iter().map(|&(_, d)| d.abs()).sum();
            if total > 0 {
                let max = tail.iter().map(|&(_, d)| d.abs()).max().unwrap();
                let share = max as f64 / total as f64;
                worst_share = worst_share.max(share);
                if share > A8_MAX_SHARE {
                    violations += 1;
                }
            }
            runs += 1;
        }
    }
    outcome(
        "A8",
        "ACorr differences bounded and without a dominant lag",
        violations,
        format!("{runs} page/step runs, worst lag share {worst_share:.3} (limit {A8_MAX_SHARE}), {violations} violations"),
    )
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn read_entries(store: &ChainStore) -> Vec<ChainEntry> {
    store
        .entries()
        .unwrap()
        .into_iter()
        .map(Result::unwrap)
        .collect()
}

fn write_entries(store: &ChainStore, entries: &[ChainEntry]) {
    let text: String = entries
        .iter()
        .map(|e| serde_json::to_string(e).unwrap() + "\n")
        .collect();
    fs::write(store.path(), text).unwrap();
}

/// Recomputes hashes and links from block `from` onward, as an attacker
/// with write access to the store would.
fn reseal_from(store: &ChainStore, from: usize) {
    let mut entries = read_entries(store);
    for i in from..entries.len() {
        let prev = if i == 0 {
            Digest::ZERO
        } else {
            entries[i - 1].record_hash
        };
        let bytes = fs::read(store.image_file(&entries[i])).unwrap();
        let e = &mut entries[i];
        e.prev_hash = prev;
        e.record_hash = block_hash(e.index, &e.prev_hash, e.step, &e.metadata, &bytes);
    }
    write_entries(store, &entries);
}

fn a9() -> Outcome {
    const RECORDS: usize = 10;
    const STEP: usize = 40;
    let root = tempfile::tempdir().unwrap();
    let base = root.path().join("base");
    fs::create_dir_all(&base).unwrap();
    let store = ChainStore::init(base.join("exams.jsonl")).unwrap();
    let mut reports = Vec::new();
    for i in 0..RECORDS {
        let page = generate_synthetic(1763, 800, 900, 9000 + i as u64);
        let metadata = format!(
            "2018-06-{:02}, student {i:02}, group 941, Linear algebra and geometry, task {}",
            10 + i,
            i % 5 + 1
        );
        let (_, report) = store.append_record(&page, &metadata, STEP).unwrap();
        reports.push(report);
    }

    let mut wrong = 0;
    let mut cases = 0;
    let kinds =
        |s: &ChainStore| -> Vec<TamperKind> { s.audit().unwrap().iter().map(|v| v.kind).collect() };
    let fresh = |name: String| -> ChainStore {
        let dir = root.path().join(name);
        copy_dir(&base, &dir);
        ChainStore::open(dir.join("exams.jsonl")).unwrap()
    };

    // (a) untouched
    cases += 1;
    if kinds(&store) != vec![TamperKind::Intact; RECORDS] {
        wrong += 1;
    }

    for i in 0..RECORDS {
        // (b) one pixel flipped in a consumed column, chain re-signed.
        cases += 1;
        let s = fresh(format!("b{i}"));
        let entry = &read_entries(&s)[i];
        let path = s.image_file(entry);
        let mut img = load_pbm(&fs::read(&path).unwrap()).unwrap();
        let col = &reports[i].consumed[reports[i].consumed.len() / 2];
        let y = col.toggled_row.unwrap_or(col.strip_index * STEP + STEP / 2);
        img.toggle(col.column_x, y);
        fs::write(&path, save_pbm(&img, PbmFormat::P4)).unwrap();
        reseal_from(&s, i);
        let got = kinds(&s);
        let mut want = vec![TamperKind::Intact; RECORDS];
        want[i] = TamperKind::ImageTampered;
        if got != want {
            wrong += 1;
        }

        // (c) metadata edited, chain re-signed.
        cases += 1;
        let s = fresh(format!("c{i}"));
        let mut entries = read_entries(&s);
        entries[i].metadata = entries[i].metadata.replace("student", "studemt");
        write_entries(&s, &entries);
        reseal_from(&s, i);
        let got = kinds(&s);
        want[i] = TamperKind::MetadataTampered;
        if got != want {
            wrong += 1;
        }

        // (d) stored bytes edited without re-signing: a raster byte of the
        // page, then a metadata character in the chain file.
        for variant in 0..2 {
            cases += 1;
            let s = fresh(format!("d{i}-{variant}"));
            if variant == 0 {
                let path = s.image_file(&read_entries(&s)[i]);
                let mut bytes = fs::read(&path).unwrap();
                let at = bytes.len() - 1 - i * 37;
                bytes[at] ^= 0x10;
                fs::write(&path, bytes).unwrap();
            } else {
                let mut entries = read_entries(&s);
                entries[i].metadata.push('.');
                write_entries(&s, &entries);
            }
            let got = kinds(&s);
            let flagged = got[i] == TamperKind::ChainLinkBroken
                || (i + 1 < RECORDS && got[i + 1] == TamperKind::ChainLinkBroken);
            if !flagged {
                wrong += 1;
            }
        }
    }
    outcome(
        "A9",
        "tamper classification on a 10-record chain",
        wrong,
        format!("{cases} scenarios, {wrong} wrong verdicts"),
    )
}

fn golden() -> (Vec<u8>, String) {
    let page = generate_synthetic(1763, 400, 200, 1);
    let (marked, report) = embed(&page, &text_to_bits("golden"), 40).unwrap();
    (save_pbm(&marked, PbmFormat::P4), report.to_json())
}

fn a10() -> Outcome {
    let (p4, json) = golden();
    let (p4_again, json_again) = golden();
    let p4_hash = Digest::of(&p4).to_string();
    let json_hash = Digest::of(json.as_bytes()).to_string();
    let mut violations = 0;
    violations += (p4 != p4_again) as usize + (json != json_again) as usize;
    violations += (p4_hash != GOLDEN_P4_SHA256) as usize;
    violations += (json_hash != GOLDEN_REPORT_SHA256) as usize;
    outcome(
        "A10",
        "golden fixture is byte-identical",
        violations,
        format!("p4 sha256 {p4_hash}, report sha256 {json_hash}"),
    )
}

fn main() {
    let mut outcomes = Vec::new();
    let (trials, elapsed) = a1_corpus();
    outcomes.push(a1(&trials, elapsed));
    outcomes.push(a2());
    outcomes.push(a3(&trials));
    outcomes.push(a4(&trials));
    drop(trials);
    outcomes.push(a5());
    outcomes.push(a6());
    outcomes.push(a7());
    outcomes.push(a8());
    outcomes.push(a9());
    outcomes.push(a10());

    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} {:<4} {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail
        );
        failed += !o.pass as usize;
    }
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
