#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "neuroloop/chip.hpp"
#include "neuroloop/errors.hpp"

using namespace neuroloop;

namespace {

ChipConfig toy_config(int neurons = 4) {
    ChipConfig cfg;
    cfg.n_neurons = neurons;
    cfg.n_plastic_cols = 8;
    cfg.n_static_cols = 8;
    cfg.mismatch_cv = 0.0;
    return cfg;
}

std::vector<AerEvent> poisson_stream(int addresses, double rate, TimeUs duration, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate * addresses);
    std::uniform_int_distribution<int> pick(0, addresses - 1);
    std::vector<AerEvent> ev;
    double t = gap(rng);
    while (t * 1e6 < static_cast<double>(duration)) {
        ev.push_back({static_cast<TimeUs>(t * 1e6), pick(rng), EventKind::input});
        t += gap(rng);
    }
    return ev;
}

// Small recurrent network with excitatory and inhibitory loops.
ConnectivityMatrix random_network(const ChipConfig& cfg, std::uint64_t seed) {
    ConnectivityMatrix m(cfg.shape());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> level(-3, 3);
    for (int n = 0; n < cfg.n_neurons; ++n) {
        m.connect_static(Source::input(n % 4), n, 3);
        for (int k = 0; k < 3; ++k) {
            m.connect_static(Source::neuron((n + k + 1) % cfg.n_neurons), n, level(rng));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("default chip mirrors the ROLLS array") {
    Chip chip{ChipConfig{}};
    CHECK(chip.neurons() == 256);
    CHECK(chip.connectivity().shape().columns() == 512);
    CHECK(chip.now() == 0);
    CHECK(chip.energy_report().sop_count == 0);
    CHECK(chip.energy_report().total_energy == 0.0);
    for (int n = 0; n < chip.neurons(); ++n) CHECK(chip.membrane(n) == 0.0);
}

TEST_CASE("zero mismatch makes the seed irrelevant") {
    auto a_cfg = toy_config(16);
    auto b_cfg = a_cfg;
    b_cfg.seed = 99;
    const auto conn = random_network(a_cfg, 5);
    Chip a(a_cfg, conn), b(b_cfg, conn);
    CHECK(a.time_constants() == b.time_constants());
    for (int n = 0; n < 16; ++n) CHECK(a.threshold(n) == b.threshold(n));
    const auto in = poisson_stream(4, 200, 300000, 3);
    CHECK(a.advance(300000, in) == b.advance(300000, in));

    const auto factors = MismatchModel::sample(a_cfg.shape(), 0.0, 17);
    for (double f : factors.synapse_unit) CHECK(f == 1.0);
}

TEST_CASE("mismatch factors are seeded and have the configured spread") {
    const ArrayShape shape{256, 256, 256};
    const auto a = MismatchModel::sample(shape, 0.1, 7);
    const auto b = MismatchModel::sample(shape, 0.1, 7);
    const auto c = MismatchModel::sample(shape, 0.1, 8);
    CHECK(a.synapse_unit == b.synapse_unit);
    CHECK(a.threshold != c.threshold);
    double sum = 0, sq = 0;
    for (double f : a.synapse_unit) {
        sum += f;
        sq += f * f;
    }
    const double n = static_cast<double>(a.synapse_unit.size());
    const double mean = sum / n;
    const double cv = std::sqrt(sq / n - mean * mean) / mean;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
    CHECK(cv == doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("invalid configs name the field") {
    auto cfg = toy_config();
    cfg.mismatch_cv = 0.7;
    try {
        Chip chip{cfg};
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_path == "chip.mismatch_cv");
    }
    cfg = toy_config();
    cfg.energy_per_sop = -1;
    CHECK_THROWS_AS(Chip{cfg}, ConfigError);
    cfg = toy_config();
    cfg.plasticity.theta_down_high = 3.0;  // overlaps [2, 15]
    CHECK_THROWS_AS(Chip{cfg}, ConfigError);
    cfg = toy_config();
    cfg.neuron.threshold = 0;
    CHECK_THROWS_AS(Chip{cfg}, ConfigError);
}

TEST_CASE("route_event counts one SOP per target") {
    auto cfg = toy_config(64);
    cfg.n_static_cols = 4;
    ConnectivityMatrix m(cfg.shape());
    for (int n = 0; n < 64; ++n) m.connect_static(Source::input(1), n, 1);
    Chip chip(cfg, m);

    CHECK(chip.route_event({0, 0, EventKind::input}) == 0);
    CHECK(chip.energy_report().sop_count == 0);
    for (int n = 0; n < 64; ++n) CHECK(chip.exc_current(n) == 0.0);

    CHECK(chip.route_event({0, 1, EventKind::input}) == 64);
    CHECK(chip.energy_report().sop_count == 64);
    const double once = chip.exc_current(3);
    CHECK(once == doctest::Approx(cfg.unit_current));
    chip.route_event({0, 1, EventKind::input});
    CHECK(chip.exc_current(3) == doctest::Approx(2 * once).epsilon(1e-15));

    CHECK_THROWS_AS(chip.route_event({0, cfg.input_addresses(), EventKind::input}), RoutingError);
}

TEST_CASE("silent chip stays silent and spends nothing") {
    Chip chip{ChipConfig{}};
    CHECK(chip.advance(10'000'000).empty());
    CHECK(chip.energy_report().sop_count == 0);
    CHECK(chip.energy_report().total_energy == 0.0);
    CHECK(chip.read_raster().empty());
}

TEST_CASE("one strong input spike gives exactly one output spike at the closed-form crossing") {
    auto cfg = toy_config(1);
    cfg.exc_synapse = ChipConfig::default_synapse(10e-3);
    cfg.plasticity.w_high = 9.6;
    ConnectivityMatrix m(cfg.shape());
    m.enable_plastic({0, 0}, 1.0);
    m.route(Source::input(0), {0, 0});
    Chip chip(cfg, m);

    const double tau_m = chip.membrane_tau(0);
    const double tau_s = chip.exc_tau(0);
    const double jump = 9.6 * cfg.unit_current;
    const double thr = chip.threshold(0);
    // Membrane response to an exponentially decaying synaptic current.
    auto membrane = [&](double t) {
        return jump * tau_s / (tau_s - tau_m) * (std::exp(-t / tau_s) - std::exp(-t / tau_m));
    };
    const double t_peak = tau_s * tau_m / (tau_m - tau_s) * std::log(tau_m / tau_s);
    REQUIRE(membrane(t_peak) > thr);
    double lo = 0, hi = t_peak;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (membrane(mid) < thr ? lo : hi) = mid;
    }
    const double crossing = hi;
    // After reset and refractory the leftover synaptic current cannot reach
    // threshold again: its peak response is 1/4 of the remaining jump.
    const double leftover = jump * std::exp(-(crossing + cfg.neuron.refractory_period) / tau_s);
    REQUIRE(0.25 * leftover < thr);

    const auto t_end = static_cast<TimeUs>(5 * tau_m * 1e6);
    const std::vector<AerEvent> in{{0, 0, EventKind::input}};
    const auto out = chip.advance(t_end, in);
    REQUIRE(out.size() == 1);
    CHECK(std::abs(static_cast<double>(out[0].timestamp) * 1e-6 - crossing) < 5e-4);
}

TEST_CASE("advance is invariant to splitting the run") {
    auto cfg = toy_config(16);
    cfg.mismatch_cv = 0.1;
    const auto conn = random_network(cfg, 11);
    const auto in = poisson_stream(4, 300, 400000, 21);
    Chip whole(cfg, conn), halves(cfg, conn);
    const auto a = whole.advance(400000, in);

    std::vector<AerEvent> first, second;
    for (const auto& e : in) (e.timestamp < 200000 ? first : second).push_back(e);
    auto b = halves.advance(200000, first);
    const auto rest = halves.advance(400000, second);
    b.insert(b.end(), rest.begin(), rest.end());
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(whole.energy_report().sop_count == halves.energy_report().sop_count);
    CHECK(whole.read_raster() == halves.read_raster());
}

TEST_CASE("advance rejects malformed streams") {
    Chip chip{toy_config()};
    const std::vector<AerEvent> unsorted{{500, 0, EventKind::input}, {100, 0, EventKind::input}};
    CHECK_THROWS_AS(chip.advance(1000, unsorted), StreamError);
    const std::vector<AerEvent> late{{5000, 0, EventKind::input}};
    CHECK_THROWS_AS(chip.advance(1000, late), StreamError);
    const std::vector<AerEvent> bad{{0, 999, EventKind::input}};
    CHECK_THROWS_AS(chip.advance(1000, bad), RoutingError);
    chip.advance(1000);
    CHECK_THROWS_AS(chip.advance(500), StreamError);
}

TEST_CASE("refractory period separates spikes of every neuron") {
    auto cfg = toy_config(16);
    cfg.mismatch_cv = 0.1;
    Chip chip(cfg, random_network(cfg, 4));
    for (int n = 0; n < 16; ++n) chip.set_bias_current(n, 200e-12);
    chip.advance(500000, poisson_stream(4, 500, 500000, 9));
    std::vector<TimeUs> last(16, -1'000'000);
    const auto refractory = static_cast<TimeUs>(cfg.neuron.refractory_period * 1e6);
    REQUIRE(chip.read_raster().size() > 100);
    for (const auto& s : chip.read_raster()) {
        CHECK(s.timestamp - last[s.neuron] > refractory);
        last[s.neuron] = s.timestamp;
    }
}

TEST_CASE("energy counts every delivered SOP, including recurrent ones") {
    auto cfg = toy_config(3);
    ConnectivityMatrix m(cfg.shape());
    m.connect_static(Source::input(0), 0, 3);
    m.connect_static(Source::input(0), 1, 1);
    m.connect_static(Source::neuron(0), 1, 1);
    m.connect_static(Source::neuron(0), 2, 1);
    m.connect_static(Source::neuron(0), 2, -1);
    Chip chip(cfg, m);
    chip.set_bias_current(0, 100e-12);  // neuron 0 fires on its own
    std::vector<AerEvent> in;
    for (int k = 0; k < 10; ++k) in.push_back({k * 10000, 0, EventKind::input});
    chip.advance(100000, in);
    std::uint64_t spikes0 = 0;
    for (const auto& s : chip.read_raster()) spikes0 += s.neuron == 0;
    REQUIRE(spikes0 > 0);
    // Spikes in the final step are still pending delivery.
    const bool last_step_spike = chip.read_raster().back().timestamp == 100000 - cfg.dt_us &&
                                 chip.read_raster().back().neuron == 0;
    const std::uint64_t delivered = spikes0 - (last_step_spike ? 1 : 0);
    CHECK(chip.energy_report().sop_count == 10 * 2 + delivered * 3);
    CHECK(chip.energy_report().total_energy ==
          static_cast<double>(chip.energy_report().sop_count) * cfg.energy_per_sop);
}

TEST_CASE("energy meter arithmetic") {
    EnergyMeter meter;
    CHECK(meter.total_energy() == 0.0);
    meter.sop_count = 1'000'000;
    CHECK(meter.total_energy() == doctest::Approx(77e-9).epsilon(1e-15));
    meter.energy_per_sop = kDynapEnergyPerSop;
    CHECK(meter.total_energy() == doctest::Approx(17e-6).epsilon(1e-15));
    meter.sop_count = 7;
    meter.energy_per_sop = kRollsEnergyPerSop;
    CHECK(meter.total_energy() == 539e-15);
}

TEST_CASE("raster records spikes in time order and matches advance output") {
    auto cfg = toy_config(8);
    ConnectivityMatrix m(cfg.shape());
    m.connect_static(Source::input(0), 7, 3);
    Chip one(cfg, m);
    one.set_membrane(7, 0.999 * one.threshold(7));
    one.advance(1000);
    one.set_bias_current(7, 0);
    // Push neuron 7 over threshold exactly in the step starting at 1000 us.
    one.set_membrane(7, one.threshold(7) * 1.5);
    one.set_bias_current(7, one.threshold(7) * 2);
    const auto out = one.advance(1100);
    REQUIRE(out.size() == 1);
    CHECK(one.read_raster().back() == RasterEntry{1000, 7});

    auto rcfg = toy_config(16);
    Chip chip(rcfg, random_network(rcfg, 8));
    std::vector<RasterEntry> concatenated;
    const auto in = poisson_stream(4, 400, 300000, 5);
    TimeUs t = 0;
    std::size_t i = 0;
    while (t < 300000) {
        const TimeUs next = t + 50000;
        std::vector<AerEvent> chunk;
        while (i < in.size() && in[i].timestamp < next) chunk.push_back(in[i++]);
        for (const auto& e : chip.advance(next, chunk)) concatenated.push_back({e.timestamp, e.address});
        t = next;
    }
    CHECK(!concatenated.empty());
    CHECK(concatenated == chip.read_raster());
    for (std::size_t k = 1; k < concatenated.size(); ++k) {
        const auto& a = concatenated[k - 1];
        const auto& b = concatenated[k];
        CHECK((a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.neuron < b.neuron)));
    }
}

TEST_CASE("identical inputs give bit-identical runs") {
    auto cfg = toy_config(16);
    cfg.mismatch_cv = 0.2;
    cfg.seed = 1234;
    const auto conn = random_network(cfg, 2);
    const auto in = poisson_stream(4, 300, 500000, 77);
    Chip a(cfg, conn), b(cfg, conn);
    CHECK(a.advance(500000, in) == b.advance(500000, in));
    CHECK(a.energy_report().sop_count == b.energy_report().sop_count);
    for (int n = 0; n < 16; ++n) CHECK(a.membrane(n) == b.membrane(n));
}

TEST_CASE("parallel neuron kernel matches the serial one") {
    auto cfg = toy_config(64);
    cfg.mismatch_cv = 0.1;
    auto pcfg = cfg;
    pcfg.parallel_step = true;
    const auto conn = random_network(cfg, 3);
    const auto in = poisson_stream(4, 400, 300000, 12);
    Chip serial(cfg, conn), parallel(pcfg, conn);
    CHECK(serial.advance(300000, in) == parallel.advance(300000, in));
    for (int n = 0; n < 64; ++n) CHECK(serial.membrane(n) == parallel.membrane(n));
}

TEST_CASE("decayed state is flushed to zero instead of going subnormal") {
    auto cfg = toy_config(4);
    Chip chip(cfg);
    chip.set_membrane(0, 1e-300);
    chip.advance(1000000);
    CHECK(chip.membrane(0) == 0.0);
    for (int n = 0; n < 4; ++n) {
        CHECK(std::fpclassify(chip.membrane(n)) != FP_SUBNORMAL);
        CHECK(std::fpclassify(chip.exc_current(n)) != FP_SUBNORMAL);
    }
}

TEST_CASE("plasticity: drift alone never crosses the bistability point") {
    auto cfg = toy_config(1);
    ConnectivityMatrix m(cfg.shape());
    m.enable_plastic({0, 0}, 0.45);
    m.enable_plastic({0, 1}, 0.55);
    Chip chip(cfg, m);
    double lo_prev = 0.45, hi_prev = 0.55;
    for (int k = 0; k < 20; ++k) {
        chip.advance(chip.now() + 50000);
        const double lo = chip.plastic_state({0, 0});
        const double hi = chip.plastic_state({0, 1});
        CHECK(lo < 0.5);
        CHECK(lo <= lo_prev);
        CHECK(hi >= 0.5);
        CHECK(hi >= hi_prev);
        lo_prev = lo;
        hi_prev = hi;
    }
    CHECK(lo_prev == 0.0);
    CHECK(hi_prev == 1.0);
}

TEST_CASE("plasticity: potentiation count follows the scalar recurrence") {
    auto cfg = toy_config(1);
    cfg.plasticity.membrane_theta = 0.0;
    cfg.plasticity.up_jump = 0.08;
    cfg.plasticity.drift_rate = 0.5;
    ConnectivityMatrix m(cfg.shape());
    m.enable_plastic({0, 0}, 0.0);
    m.route(Source::input(0), {0, 0});
    Chip chip(cfg, m);
    chip.set_bias_current(0, 40e-12);  // ~70 Hz, calcium inside the potentiation band
    chip.advance(300000);
    REQUIRE(chip.calcium(0) >= cfg.plasticity.theta_up_low);

    const TimeUs gap = 20000;
    // Oracle: x <- max(0, x - drift * gap) + a, until x >= 0.5.
    int expected = 0;
    {
        double x = 0.0;
        bool first = true;
        while (x < 0.5) {
            if (!first) x = std::max(0.0, x - cfg.plasticity.drift_rate * gap * 1e-6);
            first = false;
            x = std::min(1.0, x + cfg.plasticity.up_jump);
            ++expected;
        }
    }
    CHECK(expected >= static_cast<int>(std::ceil(0.5 / cfg.plasticity.up_jump)));

    int pairings = 0;
    while (chip.plastic_state({0, 0}) < 0.5 && pairings < 100) {
        const std::vector<AerEvent> pre{{chip.now(), 0, EventKind::input}};
        chip.advance(chip.now() + gap, pre);
        ++pairings;
        CHECK(chip.calcium(0) >= cfg.plasticity.theta_up_low);
    }
    CHECK(pairings == expected);
}

TEST_CASE("plasticity: calcium outside both bands stops learning") {
    auto cfg = toy_config(1);
    cfg.plasticity.drift_rate = 0.0;
    ConnectivityMatrix m(cfg.shape());
    m.enable_plastic({0, 0}, 0.3);
    m.route(Source::input(0), {0, 0});
    Chip chip(cfg, m);
    REQUIRE(chip.calcium(0) < cfg.plasticity.theta_down_low);
    for (int k = 0; k < 10; ++k) chip.update_plasticity({0, 0});
    CHECK(chip.plastic_state({0, 0}) == 0.3);

    // Disabled columns ignore presynaptic spikes.
    chip.update_plasticity({0, 3});
    CHECK(chip.plastic_state({0, 3}) == 0.0);
}

TEST_CASE("plastic state stays in [0, 1] and static weights never change") {
    auto cfg = toy_config(8);
    cfg.plasticity.up_jump = 0.4;
    cfg.plasticity.down_jump = 0.4;
    ConnectivityMatrix m = random_network(cfg, 6);
    for (int n = 0; n < 8; ++n) {
        m.connect_plastic(Source::input(n % 4), n, 0.5);
        m.connect_plastic(Source::neuron((n + 3) % 8), n, 0.2);
    }
    Chip chip(cfg, m);
    for (int n = 0; n < 8; ++n) chip.set_bias_current(n, 25e-12 * (n + 1));
    chip.advance(1'000'000, poisson_stream(4, 400, 1'000'000, 8));
    for (int n = 0; n < 8; ++n) {
        for (int c = 0; c < cfg.n_plastic_cols; ++c) {
            const double x = chip.plastic_state({n, c});
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        for (int c = cfg.n_plastic_cols; c < cfg.shape().columns(); ++c) {
            CHECK(chip.connectivity().static_level({n, c}) == m.static_level({n, c}));
        }
    }
}

TEST_CASE("connectivity text format round-trips through the chip") {
    auto cfg = toy_config(8);
    auto m = random_network(cfg, 10);
    m.connect_plastic(Source::input(2), 5, 0.75);
    std::stringstream text;
    write_connectivity(text, m);
    const auto back = read_connectivity(text, cfg.shape());
    std::stringstream again;
    write_connectivity(again, back);
    CHECK(again.str() == text.str());

    const auto in = poisson_stream(4, 300, 200000, 1);
    Chip a(cfg, m), b(cfg, back);
    CHECK(a.advance(200000, in) == b.advance(200000, in));

    std::istringstream bad("[static]\n0,1,2\n");  // column 1 is plastic
    CHECK_THROWS_AS(read_connectivity(bad, cfg.shape()), RoutingError);
    std::istringstream level("[static]\n0,9,5\n");
    CHECK_THROWS_AS(read_connectivity(level, cfg.shape()), DomainError);
    std::istringstream loose("0,9,1\n");
    CHECK_THROWS_AS(read_connectivity(loose, cfg.shape()), ParseError);
}

TEST_CASE("merging fragments moves synapses to free columns") {
    auto cfg = toy_config(2);
    ConnectivityMatrix a(cfg.shape()), b(cfg.shape());
    a.connect_static(Source::input(0), 0, 2);
    b.connect_static(Source::input(1), 0, -1);
    a.merge(b);
    CHECK(a.static_synapse_count() == 2);
    const auto& t = a.targets(Source::input(1));
    REQUIRE(t.size() == 1);
    CHECK(a.static_level(t[0]) == -1);
    CHECK(t[0].column != a.targets(Source::input(0))[0].column);
}

TEST_CASE("AER text format") {
    std::istringstream in("# header\n0,3\n100, 4  # trailing\n\n100,1\n");
    const auto ev = read_aer(in);
    REQUIRE(ev.size() == 3);
    CHECK(ev[1] == AerEvent{100, 4, EventKind::input});
    std::ostringstream out;
    write_aer(out, ev);
    CHECK(out.str() == "0,3\n100,4\n100,1\n");

    std::istringstream backwards("10,1\n5,1\n");
    CHECK_THROWS_AS(read_aer(backwards), StreamError);
    std::istringstream junk("10;1\n");
    CHECK_THROWS_AS(read_aer(junk), ParseError);
}
