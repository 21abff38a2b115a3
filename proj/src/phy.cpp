#include "backlab/phy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace backlab {

namespace {

double quantize_tenth_us(double us) { return std::round(us * 10.0) / 10.0; }

}  // namespace

PhyProfile PhyProfile::equal_slots(double slot_us) {
    PhyProfile phy{slot_us, slot_us, slot_us};
    validate(phy);
    return phy;
}

PhyProfile PhyProfile::ieee80211g(double rate_mbps, double preamble_us,
                                  int mac_header_bits, int payload_bits,
                                  double sifs_us, double difs_us,
                                  double sigma_us, double ack_us) {
    const double header_us = mac_header_bits / rate_mbps;
    const double payload_us = payload_bits / rate_mbps;
    PhyProfile phy;
    phy.t_idle_us = quantize_tenth_us(sigma_us);
    phy.t_succ_us = quantize_tenth_us(preamble_us + header_us + payload_us +
                                      sifs_us + ack_us + difs_us);
    phy.t_coll_us =
        quantize_tenth_us(preamble_us + header_us + payload_us + difs_us);
    validate(phy);
    return phy;
}

void validate(const PhyProfile& phy) {
    if (!(phy.t_idle_us > 0.0) || !(phy.t_succ_us > 0.0) ||
        !(phy.t_coll_us > 0.0)) {
        throw std::invalid_argument("slot lengths must be positive");
    }
    if (phy.t_succ_us < phy.t_idle_us || phy.t_coll_us < phy.t_idle_us) {
        throw std::invalid_argument(
            "busy slots must be at least as long as the idle mini-slot");
    }
}

RetryLimit RetryLimit::at_most(int k) {
    if (k < 0) {
        throw std::invalid_argument("retry limit must be non-negative");
    }
    return RetryLimit(k);
}

int RetryLimit::value() const {
    if (is_unlimited()) {
        throw std::logic_error("unlimited retry limit has no finite value");
    }
    return k_;
}

}  // namespace backlab
