use std::cell::Cell;

use lyricar_core::corpus::{candidate_lines, Lang, Line, Paragraph, SimilarityMode};
use lyricar_core::rewards::*;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn en(lines: &[&str]) -> Paragraph {
    Paragraph::new("src", Lang::En, lines.iter().copied()).unwrap()
}

fn la(n: usize) -> String {
    vec!["la"; n].join(" ")
}

fn zh_lines(lines: &[&str]) -> Vec<Line> {
    lines.iter().map(|l| Line::annotate(l, Lang::Zh)).collect()
}

struct CountingJudge {
    calls: Cell<usize>,
    verdict: Verdict,
}

impl JudgeClient for CountingJudge {
    fn judge(&self, _: &Paragraph, _: &str, _: &str) -> Result<Verdict, JudgeError> {
        self.calls.set(self.calls.get() + 1);
        Ok(self.verdict)
    }
}

struct FailingJudge;

impl JudgeClient for FailingJudge {
    fn judge(&self, _: &Paragraph, _: &str, _: &str) -> Result<Verdict, JudgeError> {
        Err(JudgeError::Exhausted { attempts: 3, last: "timeout".into() })
    }
}

#[test]
fn format_examples() {
    let five = la(5);
    let src = en(&[&five, &five, &five, &five]);
    assert!((format_reward(&src, "一二三四五 / 一二三四五 / 一二三四五 / 一二三四五", " / ", 1.0) - 1.0).abs() < TOL);
    let r = format_reward(&src, "一二三四五 / 一二三 / 一二三四五 / 一二三四五六七", " / ", 1.0);
    assert!((r - 0.8).abs() < TOL, "{r}");
    let r = format_reward(&src, "一二三四五 / 一二三四五 / 一二三四五", " / ", 1.0);
    assert!((r - 0.75).abs() < TOL, "{r}");
    assert_eq!(format_reward(&src, "", " / ", 1.0), 0.0);
    assert_eq!(format_reward(&src, "   ", " / ", 1.0), 0.0);
}

#[test]
fn format_length_ratio_scales_target() {
    let src = en(&[&la(4), &la(4)]);
    // target = round(1.5 * 4) = 6
    assert!((format_reward(&src, "一二三四五六 / 一二三四五六", " / ", 1.5) - 1.0).abs() < TOL);
}

#[test]
fn rhythm_examples() {
    let src = en(&[&la(7), &la(7), &la(8)]);
    let exact = zh_lines(&["一二三四五六七", "一二三四五六七", "一二三四五六七八"]);
    assert!((rhythm_reward(&src, &exact) - 1.0).abs() < TOL);
    let off = zh_lines(&["一二三四五六", "一二三四五六七", "一二三四五六七八九十"]);
    assert!((rhythm_reward(&src, &off) - (1.0 - 3.0 / 22.0)).abs() < TOL);
    let silent = zh_lines(&["...", "!", "?"]);
    assert_eq!(rhythm_reward(&src, &silent), 0.0);
    assert_eq!(rhythm_reward(&src, &zh_lines(&["一二三"])), 0.0);
    let empty_src = en(&["...", "!"]);
    assert_eq!(rhythm_reward(&empty_src, &zh_lines(&["一", "二"])), 0.0);
}

#[test]
fn rhyme_examples() {
    // 光 guang, 香 xiang, 唱 chang -> ang; 中 zhong -> eng family; 你 ni -> i
    let all = zh_lines(&["月光", "花香", "歌唱"]);
    assert!((rhyme_reward(&all, SimilarityMode::Binary) - 1.0).abs() < TOL);
    let mixed = zh_lines(&["月光", "心中", "歌唱"]);
    assert_eq!(rhyme_reward(&mixed, SimilarityMode::Binary), 0.0);
    let half = zh_lines(&["月光", "花香", "爱你"]);
    assert!((rhyme_reward(&half, SimilarityMode::Binary) - 0.5).abs() < TOL);
    assert_eq!(rhyme_reward(&zh_lines(&["月光"]), SimilarityMode::Binary), 0.0);
}

#[test]
fn subscore_examples() {
    let w = RewardWeights::default();
    assert!((automatic_subscore(1.0, 1.0, 1.0, &w).unwrap() - 1.0).abs() < TOL);
    assert!((automatic_subscore(0.8, 0.9, 0.7, &w).unwrap() - 0.8).abs() < TOL);
    assert_eq!(automatic_subscore(0.0, 0.0, 0.0, &w).unwrap(), 0.0);
    assert!(automatic_subscore(1.0, 1.0, 1.0, &RewardWeights::from([0.0, 0.0, 0.0, 1.0])).is_err());
}

#[test]
fn total_examples() {
    let w = RewardWeights::default();
    assert!((total_reward(1.0, 1.0, 1.0, 1.0, &w) - 1.0).abs() < TOL);
    assert!((total_reward(0.8, 0.9, 0.7, 0.0, &w) - 0.6).abs() < TOL);
    assert!((total_reward(0.0, 0.0, 0.0, -1.0, &w) + 0.25).abs() < TOL);
}

#[test]
fn gating_examples() {
    let src = en(&["hello"]);
    let band = GatingBand::default();
    let judge = CountingJudge { calls: Cell::new(0), verdict: Verdict::Good };
    let tq = text_quality(&src, "你好", 0.9, &band, OutOfBand::Polarized, &judge, "judge_v1");
    assert_eq!((tq.score, tq.source), (1, TxtqSource::BandHigh));
    let tq = text_quality(&src, "你好", 0.3, &band, OutOfBand::Polarized, &judge, "judge_v1");
    assert_eq!((tq.score, tq.source), (-1, TxtqSource::BandLow));
    assert_eq!(judge.calls.get(), 0);
    let tq = text_quality(&src, "你好", 0.6, &band, OutOfBand::Polarized, &judge, "judge_v1");
    assert_eq!((tq.score, tq.source), (1, TxtqSource::Judge));
    assert_eq!(judge.calls.get(), 1);
    // band edges are inside
    text_quality(&src, "你好", 0.5, &band, OutOfBand::Polarized, &judge, "judge_v1");
    text_quality(&src, "你好", 0.7, &band, OutOfBand::Polarized, &judge, "judge_v1");
    assert_eq!(judge.calls.get(), 3);

    let tq = text_quality(&src, "你好", 0.3, &band, OutOfBand::Neutral, &judge, "judge_v1");
    assert_eq!((tq.score, tq.source), (0, TxtqSource::BandLow));
}

#[test]
fn judge_failure_degrades_to_zero() {
    let src = en(&["hello"]);
    let tq = text_quality(&src, "你好", 0.6, &GatingBand::default(), OutOfBand::Polarized, &FailingJudge, "judge_v1");
    assert_eq!((tq.score, tq.source), (0, TxtqSource::Judge));
    assert!(tq.degraded.unwrap().contains("timeout"));
}

#[test]
fn band_guard() {
    assert!(GatingBand::new(0.7, 0.5).is_err());
    assert!(GatingBand::new(-0.1, 0.5).is_err());
    assert!(GatingBand::new(0.5, 0.7).is_ok());
}

#[test]
fn engine_exact_structure_scores_full_automatic_components() {
    let src = en(&["the moon is bright", "the night is long"]);
    let judge = CountingJudge { calls: Cell::new(0), verdict: Verdict::Poor };
    let engine = RewardEngine::new(RewardConfig::default(), &judge).unwrap();
    let s = engine.score(&src, "月亮明光 / 夜晚很长").unwrap();
    assert_eq!((s.breakdown.fmt, s.breakdown.rtm, s.breakdown.rym), (1.0, 1.0, 1.0));
    assert_eq!(s.breakdown.txtq_source, TxtqSource::BandHigh);
    assert!((s.breakdown.total - 1.0).abs() < TOL);
    assert!(!s.judge_called);
}

#[test]
fn gating_economy_twenty_percent() {
    // Per block of five candidates exactly one lands in band (subscore 2/3).
    let src = en(&["the moon is bright", "the night is long", "we sing along"]);
    let judge = CountingJudge { calls: Cell::new(0), verdict: Verdict::Acceptable };
    let engine = RewardEngine::new(RewardConfig::default(), &judge).unwrap();
    let sub = |text: &str| {
        let c = engine.config();
        let lines = candidate_lines(text, &c.boundary, Lang::Zh);
        let f = format_reward(&src, text, &c.boundary, c.length_ratio);
        automatic_subscore(f, rhythm_reward(&src, &lines), rhyme_reward(&lines, c.rhyme_mode), &c.weights).unwrap()
    };
    let band_text = "月亮明光 / 夜晚很你 / 一起唱我"; // fmt 1, rtm 1, rym 0 -> 2/3
    let high_text = "月亮明光 / 夜晚很长 / 一起歌唱"; // 1
    let low_text = "光";
    assert!((sub(band_text) - 2.0 / 3.0).abs() < TOL);
    assert!(sub(high_text) > 0.7);
    assert!(sub(low_text) < 0.5);
    let batch: Vec<&str> = (0..100)
        .map(|i| match i % 5 {
            0 => band_text,
            1 | 2 => high_text,
            _ => low_text,
        })
        .collect();
    for c in &batch {
        engine.score(&src, c).unwrap();
    }
    assert_eq!(judge.calls.get(), 20);
}

proptest! {
    #[test]
    fn components_bounded(text in "[一二三光香你 /a-z.!]{0,40}", n in 1usize..5, syl in 1usize..9) {
        let lines: Vec<String> = (0..n).map(|_| la(syl)).collect();
        let src = Paragraph::new("s", Lang::En, &lines).unwrap();
        let judge = StubJudge::new(1);
        let engine = RewardEngine::new(RewardConfig::default(), &judge).unwrap();
        let b = engine.score(&src, &text).unwrap().breakdown;
        for x in [b.fmt, b.rtm, b.rym] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!((-1..=1).contains(&b.txtq));
        prop_assert!(b.total >= -0.25 - TOL && b.total <= 1.0 + TOL);
    }

    #[test]
    fn total_is_linear(c in prop::array::uniform4(-1.0f64..1.0), w in prop::array::uniform4(0.0f64..2.0), i in 0usize..4, h in 0.01f64..1.0) {
        let weights = RewardWeights::from(w);
        let f = |c: [f64; 4]| total_reward(c[0], c[1], c[2], c[3], &weights);
        let mut hi = c;
        hi[i] += h;
        let mut lo = c;
        lo[i] -= h;
        let slope = (f(hi) - f(lo)) / (2.0 * h);
        prop_assert!((slope - w[i]).abs() < 1e-9);
    }

    #[test]
    fn rhyme_ignores_trailing_punctuation(idx in prop::collection::vec(0usize..6, 2..6), punct in "[.,!?…]{1,3}") {
        let words = ["月光", "花香", "爱你", "心中", "明天", "回家"];
        let plain: Vec<String> = idx.iter().map(|&i| words[i].to_string()).collect();
        let dressed: Vec<String> = plain.iter().map(|w| format!("{w}{punct}")).collect();
        let a: Vec<Line> = plain.iter().map(|l| Line::annotate(l, Lang::Zh)).collect();
        let b: Vec<Line> = dressed.iter().map(|l| Line::annotate(l, Lang::Zh)).collect();
        for mode in [SimilarityMode::Binary, SimilarityMode::Graded] {
            prop_assert_eq!(rhyme_reward(&a, mode), rhyme_reward(&b, mode));
        }
    }
}
