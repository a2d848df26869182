#include "lgspdc/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lgspdc/errors.hpp"

namespace lgspdc {

double CrystalSpec::central_mismatch() const {
    double grating = 0.0;
    if (poling_period) grating = 2.0 * std::numbers::pi / *poling_period;
    return pump.wavenumber - signal.wavenumber - idler.wavenumber - grating;
}

void CrystalSpec::validate(double phase_matching_tolerance) const {
    if (!(length > 0.0)) throw DomainError("crystal length must be positive");
    for (const BeamDispersion* b : {&pump, &signal, &idler}) {
        if (!(b->wavenumber > 0.0)) throw DomainError("wavenumbers must be positive");
        if (!(b->group_velocity > 0.0)) throw DomainError("group velocities must be positive");
    }
    if (poling_period && !(*poling_period > 0.0)) {
        throw DomainError("poling period must be positive");
    }
    const double mismatch = central_mismatch();
    if (std::abs(mismatch) > phase_matching_tolerance) {
        std::ostringstream os;
        os << "central phase matching violated: k_p - k_s - k_i - 2pi/Lambda = " << mismatch
           << " rad/m exceeds tolerance " << phase_matching_tolerance << " rad/m";
        throw DomainError(os.str());
    }
}

CrystalSpec CrystalSpec::swapped() const {
    CrystalSpec out = *this;
    std::swap(out.signal, out.idler);
    return out;
}

void BeamGeometry::validate() const {
    if (!(waist_pump > 0.0 && waist_signal > 0.0 && waist_idler > 0.0)) {
        throw DomainError("beam waists must be positive");
    }
}

RayleighLengths BeamGeometry::rayleigh_lengths(const CrystalSpec& c) const {
    return {0.5 * c.pump.wavenumber * waist_pump * waist_pump,
            0.5 * c.signal.wavenumber * waist_signal * waist_signal,
            0.5 * c.idler.wavenumber * waist_idler * waist_idler};
}

double delta_omega(double os, double oi, const CrystalSpec& c) {
    const double sum = os + oi;
    // Signal and idler terms are grouped so that exchanging them is exact.
    const double group = os / c.signal.group_velocity + oi / c.idler.group_velocity;
    const double gvd = c.signal.gvd * os * os + c.idler.gvd * oi * oi;
    return (sum / c.pump.group_velocity - group) + 0.5 * (c.pump.gvd * sum * sum - gvd);
}

double delta_omega(double os, double oi, const CrystalSpec& c, double center_s, double center_i,
                   const WarningSink& sink) {
    if (sink) {
        if (std::abs(os) >= 0.2 * center_s || std::abs(oi) >= 0.2 * center_i) {
            sink("detuning exceeds 20% of the central frequency; the second-order "
                 "dispersion expansion is unreliable");
        }
    }
    return delta_omega(os, oi, c);
}

double phase_mismatch_kz(TransverseMomentum qs, TransverseMomentum qi, Detunings d,
                         const CrystalSpec& c) {
    const double kp = c.pump.wavenumber, ks = c.signal.wavenumber, ki = c.idler.wavenumber;
    return delta_omega(d, c) + qs.rho * qs.rho * (kp - ks) / (2.0 * kp * ks) +
           qi.rho * qi.rho * (kp - ki) / (2.0 * kp * ki) -
           qs.rho * qi.rho * std::cos(qi.phi - qs.phi) / kp;
}

double SellmeierModel::index(double wavelength, std::optional<double> temperature) const {
    if (wavelength < min_wavelength || (max_wavelength > 0.0 && wavelength > max_wavelength)) {
        std::ostringstream os;
        os << "wavelength " << wavelength << " m outside the Sellmeier validity window ["
           << min_wavelength << ", " << max_wavelength << "] m";
        throw RangeError(os.str());
    }
    const double um = wavelength * 1e6;
    const double l2 = um * um;
    double n2 = constant - ir_coefficient * l2;
    for (const Term& t : terms) {
        n2 += (t.lambda_squared_numerator ? t.strength * l2 : t.strength) / (l2 - t.pole);
    }
    if (!(n2 > 0.0)) throw RangeError("Sellmeier model yields a non-positive n^2");
    double n = std::sqrt(n2);
    if (temperature) n += dn_dT * (*temperature - reference_temperature);
    return n;
}

DispersionSample dispersion_from_index(const IndexModel& n_of_lambda, double wavelength,
                                       double relative_step) {
    const double two_pi_c = 2.0 * std::numbers::pi * kSpeedOfLight;
    const double w0 = two_pi_c / wavelength;
    const double h = relative_step * w0;
    auto k = [&](double w) { return n_of_lambda(two_pi_c / w) * w / kSpeedOfLight; };
    const double km = k(w0 - h), k0 = k(w0), kp = k(w0 + h);
    DispersionSample out;
    out.index = n_of_lambda(wavelength);
    out.beam.wavenumber = k0;
    out.beam.group_velocity = 2.0 * h / (kp - km);
    out.beam.gvd = (kp - 2.0 * k0 + km) / (h * h);
    return out;
}

DispersionSample sellmeier_wavenumber(double wavelength, const SellmeierModel& model,
                                      std::optional<double> temperature, double relative_step) {
    model.index(wavelength, temperature);  // range check at the centre wavelength
    return dispersion_from_index(
        [&](double lam) { return model.index(lam, temperature); }, wavelength, relative_step);
}

}  // namespace lgspdc
