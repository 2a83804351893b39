#include "neuroloop/layout.hpp"

#include <stdexcept>

#include "neuroloop/errors.hpp"

namespace neuroloop {

Population NetworkLayout::add(const std::string& name, int size) {
    if (size < 0) throw CapacityError("population '" + name + "' has negative size");
    if (has(name)) throw CapacityError("population '" + name + "' declared twice");
    if (used_ + size > capacity_) {
        throw CapacityError("population '" + name + "' of " + std::to_string(size) + " neurons overflows the " +
                            std::to_string(capacity_) + "-neuron chip by " +
                            std::to_string(used_ + size - capacity_));
    }
    pops_.push_back({name, used_, size});
    used_ += size;
    return pops_.back();
}

const Population& NetworkLayout::at(const std::string& name) const {
    for (const auto& p : pops_) {
        if (p.name == name) return p;
    }
    throw std::out_of_range("no population named '" + name + "'");
}

bool NetworkLayout::has(const std::string& name) const {
    for (const auto& p : pops_) {
        if (p.name == name) return true;
    }
    return false;
}

const Population* NetworkLayout::owner(int neuron) const {
    for (const auto& p : pops_) {
        if (p.contains(neuron)) return &p;
    }
    return nullptr;
}

void connect_all(ConnectivityMatrix& m, const Population& from, const Population& to, int level) {
    for (int i = from.begin; i < from.end(); ++i) {
        for (int j = to.begin; j < to.end(); ++j) {
            if (i != j) m.connect_static(Source::neuron(i), j, level);
        }
    }
}

}  // namespace neuroloop
