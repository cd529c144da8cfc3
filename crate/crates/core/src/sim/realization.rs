use rand::Rng;
use rand_distr::Exp1;

use super::{associate, link_gain, max_interference_gain, path_gain, sample_ppp, Point2D, PowerRule};
use crate::analytic::distributions::buyer_power_from_uniform;
use crate::error::{Error, Result};
use crate::model::{OperatorId, OperatorKind, ScenarioConfig, SubBandId};
use crate::units::dbm_to_linear;

/// Fading from every transmitter on a sub-band to one typical user at the
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFading {
    /// One gain per base station of the band's seller.
    pub seller: Vec<f64>,
    /// Per buyer in the sharing group, one gain per base station.
    pub buyers: Vec<Vec<f64>>,
}

/// Fading and buyer powers on one sub-band of a realization.
#[derive(Debug, Clone, PartialEq)]
pub struct BandState {
    pub band: SubBandId,
    /// Interference threshold of the owning seller, mW.
    pub threshold: f64,
    /// Sharing group, ascending. Per-buyer vectors below use the same order.
    pub buyers: Vec<usize>,
    /// Per group buyer, gain of every (base station, seller user) link stored
    /// row-major: `[bs * n_ue + ue]`.
    pub cross_fading: Vec<Vec<f64>>,
    /// Per group buyer, transmit power of every base station, mW.
    pub buyer_power: Vec<Vec<f64>>,
    /// Buyer powers when the typical seller user is also protected; `None`
    /// unless the realization was sampled with probe protection.
    pub protected_power: Option<Vec<Vec<f64>>>,
    /// Uniform marks behind [`PowerRule::IndependentMarks`]; empty otherwise.
    pub marks: Vec<Vec<f64>>,
    /// Typical seller user.
    pub seller_probe: ProbeFading,
    /// Typical user of each group buyer.
    pub buyer_probes: Vec<ProbeFading>,
    /// Base stations given the power cap because no seller user was sampled.
    pub cap_events: u64,
}

impl BandState {
    pub fn slot(&self, buyer: usize) -> Option<usize> {
        self.buyers.iter().position(|&b| b == buyer)
    }

    /// Buyer powers seen by the typical seller user.
    pub fn seller_view_power(&self) -> &[Vec<f64>] {
        self.protected_power.as_deref().unwrap_or(&self.buyer_power)
    }
}

/// One sampled network: point sets for every operator plus fading and buyer
/// powers on the requested sub-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub alpha: f64,
    pub radius: f64,
    /// Noise power, mW.
    pub noise: f64,
    /// Buyer power when there is no seller user to protect, mW.
    pub power_cap: f64,
    pub rule: PowerRule,
    pub protect_probe: bool,
    /// Per seller, base-station power in mW.
    pub seller_power: Vec<f64>,
    /// Per seller, user intensity (needed by [`PowerRule::IndependentMarks`]).
    pub seller_ue_intensity: Vec<f64>,
    pub seller_bs: Vec<Vec<Point2D>>,
    pub seller_ue: Vec<Vec<Point2D>>,
    pub buyer_bs: Vec<Vec<Point2D>>,
    pub buyer_ue: Vec<Vec<Point2D>>,
    pub bands: Vec<BandState>,
}

fn exp_draws<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

/// `ζ / H`, nudged down by one ulp when rounding would let `P · H` exceed
/// `ζ`.
fn capped_inverse(threshold: f64, gain: f64) -> f64 {
    let p = threshold / gain;
    if p * gain > threshold {
        p.next_down()
    } else {
        p
    }
}

impl NetworkRealization {
    /// Samples every operator's points, then fading and powers on `bands`.
    ///
    /// Random numbers are consumed in a fixed order that does not depend on
    /// the power rule, so realizations under different rules with the same
    /// generator share geometry and fading.
    pub fn sample<R: Rng + ?Sized>(
        config: &ScenarioConfig,
        bands: &[SubBandId],
        rule: PowerRule,
        protect_probe: bool,
        rng: &mut R,
    ) -> Result<Self> {
        config.ensure_valid()?;
        let radius = config.region_radius;
        let mut seller_bs = Vec::with_capacity(config.sellers.len());
        let mut seller_ue = Vec::with_capacity(config.sellers.len());
        for s in &config.sellers {
            seller_bs.push(sample_ppp(s.bs_intensity, radius, rng));
            seller_ue.push(sample_ppp(s.ue_intensity, radius, rng));
        }
        let mut buyer_bs = Vec::with_capacity(config.buyers.len());
        let mut buyer_ue = Vec::with_capacity(config.buyers.len());
        for b in &config.buyers {
            buyer_bs.push(sample_ppp(b.bs_intensity, radius, rng));
            buyer_ue.push(sample_ppp(b.ue_intensity, radius, rng));
        }

        let mut states = Vec::with_capacity(bands.len());
        for &band in bands {
            let seller = config.sellers.get(band.seller).filter(|s| band.band < s.num_subbands);
            let seller = seller.ok_or(Error::UnknownBand(band))?;
            let buyers: Vec<usize> = config.group(band).collect();
            let n_sbs = seller_bs[band.seller].len();
            let n_sue = seller_ue[band.seller].len();
            let cross_fading = buyers.iter().map(|&b| exp_draws(buyer_bs[b].len() * n_sue, rng)).collect();
            let mut probe = || ProbeFading {
                seller: exp_draws(n_sbs, rng),
                buyers: buyers.iter().map(|&b| exp_draws(buyer_bs[b].len(), rng)).collect(),
            };
            let seller_probe = probe();
            let buyer_probes = buyers.iter().map(|_| probe()).collect();
            states.push(BandState {
                band,
                threshold: dbm_to_linear(seller.interference_threshold_dbm),
                buyers,
                cross_fading,
                buyer_power: Vec::new(),
                protected_power: None,
                marks: Vec::new(),
                seller_probe,
                buyer_probes,
                cap_events: 0,
            });
        }
        if rule == PowerRule::IndependentMarks {
            for st in &mut states {
                st.marks =
                    st.buyers.iter().map(|&b| (0..buyer_bs[b].len()).map(|_| rng.random::<f64>()).collect()).collect();
            }
        }

        let mut r = NetworkRealization {
            alpha: config.path_loss_exponent,
            radius,
            noise: dbm_to_linear(config.noise_power_dbm),
            power_cap: dbm_to_linear(config.buyer_power_cap_dbm),
            rule,
            protect_probe,
            seller_power: config.sellers.iter().map(|s| dbm_to_linear(s.tx_power_dbm)).collect(),
            seller_ue_intensity: config.sellers.iter().map(|s| s.ue_intensity).collect(),
            seller_bs,
            seller_ue,
            buyer_bs,
            buyer_ue,
            bands: states,
        };
        r.assign_powers();
        Ok(r)
    }

    pub fn band(&self, band: SubBandId) -> Option<&BandState> {
        self.bands.iter().find(|b| b.band == band)
    }

    pub fn base_stations(&self, op: OperatorId) -> &[Point2D] {
        match op.kind {
            OperatorKind::Seller => &self.seller_bs[op.index],
            OperatorKind::Buyer => &self.buyer_bs[op.index],
        }
    }

    pub fn cap_events(&self) -> u64 {
        self.bands.iter().map(|b| b.cap_events).sum()
    }

    /// Fills `buyer_power` (and `protected_power`) on every band from the
    /// stored fading according to `self.rule`.
    pub fn assign_powers(&mut self) {
        let alpha = self.alpha;
        for st in &mut self.bands {
            let sues = &self.seller_ue[st.band.seller];
            let mut caps = 0;
            let mut powers = Vec::with_capacity(st.buyers.len());
            let mut protected = Vec::with_capacity(st.buyers.len());
            for (slot, &b) in st.buyers.iter().enumerate() {
                let bss = &self.buyer_bs[b];
                let mut p = Vec::with_capacity(bss.len());
                let mut pp = Vec::with_capacity(bss.len());
                for (f, bs) in bss.iter().enumerate() {
                    // Contribution of the typical seller user at the origin.
                    let probe_gain = link_gain(st.seller_probe.buyers[slot][f], bs.norm2(), alpha);
                    let (own, with_probe) = match self.rule {
                        PowerRule::MaxGain => {
                            let row = &st.cross_fading[slot][f * sues.len()..(f + 1) * sues.len()];
                            let h = max_interference_gain(*bs, sues, row, alpha);
                            let hp = h.map_or(probe_gain, |h| h.max(probe_gain));
                            (h.map(|h| capped_inverse(st.threshold, h)), capped_inverse(st.threshold, hp))
                        }
                        PowerRule::NearestDistance => {
                            let d2 = sues.iter().map(|u| bs.dist2(u)).reduce(f64::min);
                            let dp = d2.map_or(bs.norm2(), |d| d.min(bs.norm2()));
                            (d2.map(|d| st.threshold / path_gain(d, alpha)), st.threshold / path_gain(dp, alpha))
                        }
                        PowerRule::IndependentMarks => {
                            let mu = self.seller_ue_intensity[st.band.seller];
                            let v = (mu > 0.0)
                                .then(|| buyer_power_from_uniform(st.marks[slot][f], mu, alpha, st.threshold));
                            (v, v.unwrap_or(self.power_cap))
                        }
                    };
                    if own.is_none() {
                        caps += 1;
                    }
                    p.push(own.unwrap_or(self.power_cap));
                    pp.push(with_probe);
                }
                powers.push(p);
                protected.push(pp);
            }
            st.buyer_power = powers;
            st.protected_power = self.protect_probe.then_some(protected);
            st.cap_events = caps;
        }
    }

    /// SINR of the typical user of `op` on `band`; `None` when `op` has no
    /// base station to associate with.
    pub fn sinr(&self, band: SubBandId, op: OperatorId) -> Result<Option<f64>> {
        match op.kind {
            OperatorKind::Seller => self.sinr_seller(band),
            OperatorKind::Buyer => self.sinr_buyer(band, op.index),
        }
    }

    pub fn sinr_seller(&self, band: SubBandId) -> Result<Option<f64>> {
        let st = self.band(band).ok_or(Error::UnknownBand(band))?;
        let bss = &self.seller_bs[band.seller];
        let ps = self.seller_power[band.seller];
        let Some(j) = associate(Point2D::ORIGIN, bss, &vec![ps; bss.len()], self.alpha) else {
            return Ok(None);
        };
        let probe = &st.seller_probe;
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (k, bs) in bss.iter().enumerate() {
            let rx = ps * link_gain(probe.seller[k], bs.norm2(), self.alpha);
            if k == j {
                signal = rx;
            } else {
                interference += rx;
            }
        }
        interference += self.buyer_interference(st, probe, st.seller_view_power(), None);
        Ok(Some(signal / (interference + self.noise)))
    }

    pub fn sinr_buyer(&self, band: SubBandId, buyer: usize) -> Result<Option<f64>> {
        let st = self.band(band).ok_or(Error::UnknownBand(band))?;
        let slot = st.slot(buyer).ok_or(Error::NotInSharingGroup { operator: OperatorId::buyer(buyer), band })?;
        let powers = &st.buyer_power[slot];
        let Some(j) = associate(Point2D::ORIGIN, &self.buyer_bs[buyer], powers, self.alpha) else {
            return Ok(None);
        };
        let probe = &st.buyer_probes[slot];
        let signal = powers[j] * link_gain(probe.buyers[slot][j], self.buyer_bs[buyer][j].norm2(), self.alpha);
        let ps = self.seller_power[band.seller];
        let mut interference: f64 = self.seller_bs[band.seller]
            .iter()
            .zip(&probe.seller)
            .map(|(bs, &h)| ps * link_gain(h, bs.norm2(), self.alpha))
            .sum();
        interference += self.buyer_interference(st, probe, &st.buyer_power, Some((slot, j)));
        Ok(Some(signal / (interference + self.noise)))
    }

    /// Interference from every group buyer's base stations at the origin,
    /// skipping `serving = (slot, bs)`.
    fn buyer_interference(
        &self,
        st: &BandState,
        probe: &ProbeFading,
        powers: &[Vec<f64>],
        serving: Option<(usize, usize)>,
    ) -> f64 {
        let mut total = 0.0;
        for (slot, &b) in st.buyers.iter().enumerate() {
            for (f, bs) in self.buyer_bs[b].iter().enumerate() {
                if serving == Some((slot, f)) {
                    continue;
                }
                total += powers[slot][f] * link_gain(probe.buyers[slot][f], bs.norm2(), self.alpha);
            }
        }
        total
    }

    /// Interference at the typical user of `op` given that its serving base
    /// station delivers average power `β/κ`: base stations of `op` itself
    /// count only when their average received power is below that level,
    /// every other transmitter on the band counts.
    pub fn conditional_interference(&self, band: SubBandId, op: OperatorId, kappa: f64, beta: f64) -> Result<f64> {
        let st = self.band(band).ok_or(Error::UnknownBand(band))?;
        let level = beta / kappa;
        let own_ok = |p: f64, bs: &Point2D| p * path_gain(bs.norm2(), self.alpha) < level;
        let ps = self.seller_power[band.seller];
        let (probe, powers, own_slot) = match op.kind {
            OperatorKind::Seller => {
                if op.index != band.seller {
                    return Err(Error::NotInSharingGroup { operator: op, band });
                }
                (&st.seller_probe, st.seller_view_power(), None)
            }
            OperatorKind::Buyer => {
                let slot = st.slot(op.index).ok_or(Error::NotInSharingGroup { operator: op, band })?;
                (&st.buyer_probes[slot], &st.buyer_power[..], Some(slot))
            }
        };
        let mut total = 0.0;
        for (bs, &h) in self.seller_bs[band.seller].iter().zip(&probe.seller) {
            if own_slot.is_none() && !own_ok(ps, bs) {
                continue;
            }
            total += ps * link_gain(h, bs.norm2(), self.alpha);
        }
        for (slot, &b) in st.buyers.iter().enumerate() {
            for (f, bs) in self.buyer_bs[b].iter().enumerate() {
                let p = powers[slot][f];
                if own_slot == Some(slot) && !own_ok(p, bs) {
                    continue;
                }
                total += p * link_gain(probe.buyers[slot][f], bs.norm2(), self.alpha);
            }
        }
        Ok(total)
    }

    /// Exhaustive recomputation of the interference every buyer base station
    /// causes at every seller user, on every sampled band.
    pub fn constraint_tally(&self) -> ConstraintTally {
        let mut t = ConstraintTally::default();
        for st in &self.bands {
            let sues = &self.seller_ue[st.band.seller];
            for (slot, &b) in st.buyers.iter().enumerate() {
                for (f, bs) in self.buyer_bs[b].iter().enumerate() {
                    let p = st.buyer_power[slot][f];
                    let row = &st.cross_fading[slot][f * sues.len()..(f + 1) * sues.len()];
                    for (ue, &h) in sues.iter().zip(row) {
                        let rx = p * link_gain(h, bs.dist2(ue), self.alpha);
                        t.pairs += 1;
                        t.worst_ratio = t.worst_ratio.max(rx / st.threshold);
                        if rx > st.threshold {
                            t.violations += 1;
                        }
                    }
                }
            }
        }
        t
    }

    /// The same network seen through a smaller window: points outside
    /// `radius` are dropped together with their fading, and buyer powers are
    /// recomputed from the remaining seller users.
    pub fn restricted(&self, radius: f64) -> Self {
        let r2 = radius * radius;
        let keep = |pts: &[Point2D]| -> Vec<usize> { (0..pts.len()).filter(|&i| pts[i].norm2() <= r2).collect() };
        let pick = |v: &[f64], idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| v[i]).collect() };
        let pick_pts = |v: &[Point2D], idx: &[usize]| -> Vec<Point2D> { idx.iter().map(|&i| v[i]).collect() };

        let sbs_keep: Vec<Vec<usize>> = self.seller_bs.iter().map(|p| keep(p)).collect();
        let sue_keep: Vec<Vec<usize>> = self.seller_ue.iter().map(|p| keep(p)).collect();
        let bbs_keep: Vec<Vec<usize>> = self.buyer_bs.iter().map(|p| keep(p)).collect();
        let bue_keep: Vec<Vec<usize>> = self.buyer_ue.iter().map(|p| keep(p)).collect();

        let bands = self
            .bands
            .iter()
            .map(|st| {
                let s = st.band.seller;
                let n_ue = self.seller_ue[s].len();
                let probe_view = |p: &ProbeFading| ProbeFading {
                    seller: pick(&p.seller, &sbs_keep[s]),
                    buyers: st.buyers.iter().enumerate().map(|(k, &b)| pick(&p.buyers[k], &bbs_keep[b])).collect(),
                };
                BandState {
                    band: st.band,
                    threshold: st.threshold,
                    buyers: st.buyers.clone(),
                    cross_fading: st
                        .buyers
                        .iter()
                        .enumerate()
                        .map(|(k, &b)| {
                            let mut out = Vec::with_capacity(bbs_keep[b].len() * sue_keep[s].len());
                            for &f in &bbs_keep[b] {
                                out.extend(sue_keep[s].iter().map(|&i| st.cross_fading[k][f * n_ue + i]));
                            }
                            out
                        })
                        .collect(),
                    buyer_power: Vec::new(),
                    protected_power: None,
                    marks: st.marks.iter().zip(&st.buyers).map(|(m, &b)| pick(m, &bbs_keep[b])).collect(),
                    seller_probe: probe_view(&st.seller_probe),
                    buyer_probes: st.buyer_probes.iter().map(probe_view).collect(),
                    cap_events: 0,
                }
            })
            .collect();

        let mut r = NetworkRealization {
            alpha: self.alpha,
            radius,
            noise: self.noise,
            power_cap: self.power_cap,
            rule: self.rule,
            protect_probe: self.protect_probe,
            seller_bs: self.seller_bs.iter().zip(&sbs_keep).map(|(p, k)| pick_pts(p, k)).collect(),
            seller_ue: self.seller_ue.iter().zip(&sue_keep).map(|(p, k)| pick_pts(p, k)).collect(),
            buyer_bs: self.buyer_bs.iter().zip(&bbs_keep).map(|(p, k)| pick_pts(p, k)).collect(),
            buyer_ue: self.buyer_ue.iter().zip(&bue_keep).map(|(p, k)| pick_pts(p, k)).collect(),
            bands,
            seller_power: self.seller_power.clone(),
            seller_ue_intensity: self.seller_ue_intensity.clone(),
        };
        r.assign_powers();
        r
    }
}

/// Outcome of [`NetworkRealization::constraint_tally`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintTally {
    /// (buyer base station, seller user, band) triples checked.
    pub pairs: u64,
    pub violations: u64,
    /// Largest received interference over the threshold.
    pub worst_ratio: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::table_one;
    use crate::sim::trial_rng;

    fn fixture() -> NetworkRealization {
        // Seller BSs at (1,0) and (0,3); buyer BS at (-2,0); seller users at
        // (-2,1) and (5,5). α = 4, P^S = 1 mW, ζ = 0.5 mW, σ² = 0.01 mW.
        let band = SubBandId::new(0, 0);
        let mut r = NetworkRealization {
            alpha: 4.0,
            radius: 10.0,
            noise: 0.01,
            power_cap: 1e4,
            rule: PowerRule::MaxGain,
            protect_probe: false,
            seller_power: vec![1.0],
            seller_ue_intensity: vec![1e-3],
            seller_bs: vec![vec![Point2D::new(1.0, 0.0), Point2D::new(0.0, 3.0)]],
            seller_ue: vec![vec![Point2D::new(-2.0, 1.0), Point2D::new(5.0, 5.0)]],
            buyer_bs: vec![vec![Point2D::new(-2.0, 0.0)]],
            buyer_ue: vec![vec![]],
            bands: vec![BandState {
                band,
                threshold: 0.5,
                buyers: vec![0],
                cross_fading: vec![vec![0.5, 2.0]],
                buyer_power: Vec::new(),
                protected_power: None,
                marks: Vec::new(),
                seller_probe: ProbeFading { seller: vec![0.8, 1.5], buyers: vec![vec![1.2]] },
                buyer_probes: vec![ProbeFading { seller: vec![0.3, 0.9], buyers: vec![vec![2.5]] }],
                cap_events: 0,
            }],
        };
        r.assign_powers();
        r
    }

    #[test]
    fn golden_fixture() {
        let r = fixture();
        let band = SubBandId::new(0, 0);
        // H = max(0.5·1⁻⁴, 2·(49+25)⁻²) = 0.5, so P = 0.5/0.5 = 1 mW.
        assert_eq!(r.bands[0].buyer_power[0][0], 1.0);
        // Seller user: serving (1,0) with gain 0.8; interferers (0,3) with
        // 1.5·3⁻⁴ and the buyer BS with 1·1.2·2⁻⁴.
        let want = 0.8 / (1.5 / 81.0 + 1.2 / 16.0 + 0.01);
        let got = r.sinr_seller(band).unwrap().unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
        // Buyer user: serving (-2,0) with 1·2.5·2⁻⁴; seller BSs interfere.
        let want = (2.5 / 16.0) / (0.3 + 0.9 / 81.0 + 0.01);
        let got = r.sinr_buyer(band, 0).unwrap().unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn unit_link_without_interference() {
        let mut r = fixture();
        r.seller_bs[0] = vec![Point2D::new(1.0, 0.0)];
        r.buyer_bs[0].clear();
        r.noise = 1.0;
        let st = &mut r.bands[0];
        st.seller_probe = ProbeFading { seller: vec![1.0], buyers: vec![vec![]] };
        st.cross_fading = vec![vec![]];
        r.assign_powers();
        assert_eq!(r.sinr_seller(SubBandId::new(0, 0)).unwrap(), Some(1.0));
        assert_eq!(r.sinr_buyer(SubBandId::new(0, 0), 0).unwrap(), None);
    }

    #[test]
    fn extra_interferer_lowers_sinr() {
        let base = fixture();
        let mut more = base.clone();
        more.seller_bs[0].push(Point2D::new(0.0, -4.0));
        more.bands[0].seller_probe.seller.push(0.7);
        more.bands[0].buyer_probes[0].seller.push(0.7);
        let band = SubBandId::new(0, 0);
        assert!(more.sinr_seller(band).unwrap() < base.sinr_seller(band).unwrap());
        assert!(more.sinr_buyer(band, 0).unwrap() < base.sinr_buyer(band, 0).unwrap());
    }

    #[test]
    fn threshold_scales_powers_linearly() {
        let band = SubBandId::new(0, 0);
        let cfg = table_one();
        let a = NetworkRealization::sample(&cfg, &[band], PowerRule::MaxGain, false, &mut trial_rng(3, 0)).unwrap();
        let cfg2 = cfg.with_threshold_dbm(-100.0 + 10.0 * 2f64.log10());
        let b = NetworkRealization::sample(&cfg2, &[band], PowerRule::MaxGain, false, &mut trial_rng(3, 0)).unwrap();
        assert_eq!(a.buyer_bs, b.buyer_bs);
        for (pa, pb) in a.bands[0].buyer_power[0].iter().zip(&b.bands[0].buyer_power[0]) {
            assert!((pb / pa - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_gain_rule_meets_threshold() {
        let band = SubBandId::new(0, 0);
        let cfg = table_one();
        for t in 0..50 {
            let r = NetworkRealization::sample(&cfg, &[band], PowerRule::MaxGain, false, &mut trial_rng(5, t)).unwrap();
            let tally = r.constraint_tally();
            assert_eq!(tally.violations, 0);
            assert!(tally.worst_ratio <= 1.0 && tally.worst_ratio > 1.0 - 1e-12);
        }
    }

    #[test]
    fn empty_seller_users_use_cap() {
        let mut cfg = table_one();
        cfg.sellers[0].ue_intensity = 0.0;
        let band = SubBandId::new(0, 0);
        let r = NetworkRealization::sample(&cfg, &[band], PowerRule::MaxGain, false, &mut trial_rng(1, 0)).unwrap();
        let n = r.buyer_bs[0].len() as u64;
        assert_eq!(r.cap_events(), n);
        assert!(r.bands[0].buyer_power[0].iter().all(|&p| p == r.power_cap));
    }

    #[test]
    fn restriction_to_same_radius_is_identity() {
        let band = SubBandId::new(0, 0);
        let r =
            NetworkRealization::sample(&table_one(), &[band], PowerRule::MaxGain, true, &mut trial_rng(9, 2)).unwrap();
        assert_eq!(r.restricted(r.radius), r);
        let inner = r.restricted(400.0);
        assert!(inner.seller_ue[0].iter().all(|p| p.norm2() <= 400.0 * 400.0));
        assert_eq!(inner.constraint_tally().violations, 0);
    }

    #[test]
    fn rules_share_geometry_and_fading() {
        let band = SubBandId::new(0, 0);
        let cfg = table_one();
        let a = NetworkRealization::sample(&cfg, &[band], PowerRule::MaxGain, false, &mut trial_rng(4, 1)).unwrap();
        let b =
            NetworkRealization::sample(&cfg, &[band], PowerRule::NearestDistance, false, &mut trial_rng(4, 1)).unwrap();
        assert_eq!(a.seller_ue, b.seller_ue);
        assert_eq!(a.bands[0].cross_fading, b.bands[0].cross_fading);
        assert_eq!(a.bands[0].seller_probe, b.bands[0].seller_probe);
    }

    #[test]
    fn nearest_distance_arithmetic() {
        let mut r = fixture();
        r.seller_ue[0] = vec![Point2D::new(-2.0, 2.0)];
        r.bands[0].cross_fading = vec![vec![1.0]];
        r.bands[0].threshold = 1.0;
        r.rule = PowerRule::NearestDistance;
        r.assign_powers();
        assert_eq!(r.bands[0].buyer_power[0][0], 16.0);
    }
}
