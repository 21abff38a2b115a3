#pragma once

namespace backlab {

// Slot-time triple in microseconds. Busy slots are never shorter than the
// idle mini-slot.
struct PhyProfile {
    double t_idle_us = 9.0;
    double t_succ_us = 325.8;
    double t_coll_us = 285.3;

    static PhyProfile equal_slots(double slot_us = 1.0);

    // 802.11g DCF basic access. Defaults: 54 Mbps PHY rate, 24 us preamble
    // plus PHY header, 272-bit MAC header + FCS, 1500-byte payload, DIFS 34,
    // SIFS 16, mini-slot 9, ACK 24.5 us. Slot lengths:
    //   t_idle = sigma
    //   t_succ = preamble + mac_hdr/rate + payload/rate + SIFS + ACK + DIFS
    //   t_coll = preamble + mac_hdr/rate + payload/rate + DIFS
    // quantized to 0.1 us so simulated time accumulates exactly.
    static PhyProfile ieee80211g(double rate_mbps = 54.0,
                                 double preamble_us = 24.0,
                                 int mac_header_bits = 272,
                                 int payload_bits = 12000,
                                 double sifs_us = 16.0,
                                 double difs_us = 34.0,
                                 double sigma_us = 9.0,
                                 double ack_us = 24.5);

    bool operator==(const PhyProfile&) const = default;
};

void validate(const PhyProfile& phy);

// Retry limit K: a packet is dropped after a collision at stage K.
// Unlimited means packets are retried forever (stages capped only by the
// simulator's bookkeeping limit).
class RetryLimit {
  public:
    static constexpr RetryLimit unlimited() { return RetryLimit(-1); }
    static RetryLimit at_most(int k);

    constexpr bool is_unlimited() const { return k_ < 0; }
    int value() const;  // throws std::logic_error when unlimited

    bool operator==(const RetryLimit&) const = default;

  private:
    explicit constexpr RetryLimit(int k) : k_(k) {}
    int k_;
};

}  // namespace backlab
