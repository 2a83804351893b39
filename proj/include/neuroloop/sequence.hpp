#pragma once

// Serial-order sequence learning on the chip. Ordinal groups hold the
// current position in the sequence as self-sustained activity, memory groups
// remember which position was last visited, and plastic synapses from the
// ordinal groups onto a content WTA store which item belongs to which
// position. A condition-of-satisfaction (CoS) population, driven by the
// harness when an item is done, switches the ordinal chain forward.

#include <cstdint>
#include <vector>

#include "neuroloop/chip.hpp"
#include "neuroloop/fields.hpp"
#include "neuroloop/layout.hpp"

namespace neuroloop {

struct SequenceParams {
    ChipConfig chip{};
    int n_items = 5;       // ordinal positions
    int group_size = 16;   // neurons per ordinal group and per memory group
    int n_locations = 64;  // content WTA excitatory pool
    int content_inh = 16;
    int cos_size = 16;
    WtaSpec content{64, 16, {3.0, 0.0, 1.5, 8.0}, 3, 1, -1, 4.0};

    int ordinal_self = 2;       // within an ordinal group, all to all
    int ordinal_cross = -3;     // ordinal group onto every other ordinal group
    int ordinal_to_memory = 1;  // ordinal i -> memory i
    int ordinal_to_other_memory = -3;  // ordinal i -> memory j, j != i
    int memory_self = 2;
    int memory_to_next = 1;     // memory i -> ordinal i+1
    int memory_reset = -3;      // memory i+1 -> memory i
    int cos_to_ordinal = -3;
    int cos_to_content = -3;    // CoS clears the content bump
    int drive_level = 3;          // external drive of ordinal and CoS groups
    int content_input_level = 3;  // external item input onto the content WTA

    // Harness timing (s) and stimulus rates (Hz).
    double t_item = 0.5;        // item presentation during learning
    double t_hold = 0.3;        // stable bump time before the harness fires CoS
    double drive_duration = 0.05;
    double drive_rate = 2000.0;
    double cos_duration = 0.1;
    double cos_rate = 2000.0;
    double settle = 0.05;       // quiet time after each CoS burst
    double idle_gap = 0.0;      // extra wait before each replay CoS burst
    double replay_timeout = 1.5;  // replay ends when no stable bump forms in time
    double item_rate = 300.0;   // peak item input rate per content neuron
    double item_sigma = 2.0;    // neurons
    double bump_window = 0.05;  // spike counting window for bump detection
    int bump_min_count = 3;     // spikes per window for a neuron to count
    int match_radius = 2;       // replayed location tolerance, neurons
};

struct SequenceNetwork {
    ChipConfig chip;
    NetworkLayout layout;
    ConnectivityMatrix connectivity;
    // Chip input addresses.
    int content_input = 0;  // one per content neuron
    int ordinal_input = 0;  // one per ordinal group
    int cos_input = 0;
};

// Populations: ordinal_1..n, memory_1..n, content, content_inh, cos.
// Throws CapacityError if they do not fit the chip.
SequenceNetwork build_sequence_network(const SequenceParams& p);

struct SequenceResult {
    std::vector<int> items;
    std::vector<int> replay;  // detected content bump locations, in order
    // learned[k][j]: mean plastic state from ordinal group k onto content
    // neuron j after learning.
    std::vector<std::vector<double>> learned;
    // synapses[r][j]: plastic state from ordinal neuron r (group r / group_size)
    // onto content neuron j after learning.
    std::vector<std::vector<double>> synapses;
    double margin = 0.0;  // min over items of on-target minus off-target mean X
    std::vector<double> replay_times;  // s since replay start, one per detection
    double replay_start = 0.0;         // s, chip time when replay began
    std::vector<RasterEntry> raster;   // learning and replay
    EnergyReport energy{};
};

// Plastic state of every ordinal neuron onto every content neuron, one row
// per ordinal neuron in layout order.
std::vector<std::vector<double>> synapse_states(const Chip& chip, const SequenceNetwork& net,
                                                const SequenceParams& p);

// Mean plastic state of every ordinal group onto every content neuron.
std::vector<std::vector<double>> learned_states(const Chip& chip, const SequenceNetwork& net,
                                                const SequenceParams& p);

// For each item k: mean X onto items[k] +- radius minus mean X elsewhere,
// minimised over k. Zero for an empty sequence.
double learning_margin(const std::vector<std::vector<double>>& learned, const std::vector<int>& items,
                       int radius);

// True if the replay has the same length as the items and each location is
// within `radius` of the item at the same position.
bool replay_matches(const std::vector<int>& replay, const std::vector<int>& items, int radius);

// Learning then replay. Throws DomainError for too many items, repeated
// locations or locations outside the content pool.
SequenceResult run_sequence_experiment(const std::vector<int>& items, const SequenceParams& p,
                                       std::uint64_t seed);

}  // namespace neuroloop
