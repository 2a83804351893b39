#pragma once

// Named, contiguous neuron ranges on one chip.

#include <string>
#include <vector>

#include "neuroloop/connectivity.hpp"

namespace neuroloop {

struct Population {
    std::string name;
    int begin = 0;
    int size = 0;

    int end() const { return begin + size; }
    bool contains(int neuron) const { return neuron >= begin && neuron < end(); }
    int operator[](int i) const { return begin + i; }
};

class NetworkLayout {
public:
    explicit NetworkLayout(int capacity = 256) : capacity_(capacity) {}

    // Appends a population after the last one. Throws CapacityError on
    // overflow or a duplicate name.
    Population add(const std::string& name, int size);

    // Throws std::out_of_range for an unknown name.
    const Population& at(const std::string& name) const;
    bool has(const std::string& name) const;

    // Population containing the neuron, or nullptr.
    const Population* owner(int neuron) const;

    const std::vector<Population>& populations() const { return pops_; }
    int used() const { return used_; }
    int capacity() const { return capacity_; }

private:
    int capacity_;
    int used_ = 0;
    std::vector<Population> pops_;
};

// Static synapse from every neuron of `from` onto every neuron of `to`,
// skipping self-connections.
void connect_all(ConnectivityMatrix& m, const Population& from, const Population& to, int level);

}  // namespace neuroloop
