#include "fedmesh/spatial_index.hpp"

#include "fedmesh/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace fedmesh::spatial {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const double* as_number(const Value& v) { return std::get_if<double>(&v); }

}  // namespace

std::string to_string(const Value& v) {
    return std::visit(overloaded{[](double d) { return fmt::format("{}", d); },
                                 [](const std::string& s) { return s; }},
                      v);
}

std::string to_string(const Constraint& c) {
    return std::visit(overloaded{[](const Eq& e) { return "= " + to_string(e.value); },
                                 [](const Ge& g) { return fmt::format(">= {}", g.value); },
                                 [](const Le& l) { return fmt::format("<= {}", l.value); },
                                 [](const Range& r) { return fmt::format("in [{}, {}]", r.lo, r.hi); }},
                      c);
}

DimensionSpec DimensionSpec::numeric(std::string name, double lo, double hi) {
    DimensionSpec d;
    d.name = std::move(name);
    d.kind = DimKind::Numeric;
    d.lo = lo;
    d.hi = hi;
    d.validate();
    return d;
}

DimensionSpec DimensionSpec::categorical(std::string name, std::vector<std::string> labels) {
    DimensionSpec d;
    d.name = std::move(name);
    d.kind = DimKind::Categorical;
    d.labels = std::move(labels);
    d.validate();
    return d;
}

void DimensionSpec::validate() const {
    if (name.empty()) throw InvalidArgument("dimension name is empty");
    if (kind == DimKind::Numeric) {
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
            throw InvalidArgument(fmt::format("dimension '{}': need lo < hi, got [{}, {}]", name, lo, hi));
        }
    } else {
        if (labels.empty()) throw InvalidArgument(fmt::format("dimension '{}': no labels", name));
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) {
            throw InvalidArgument(fmt::format("dimension '{}': duplicate labels", name));
        }
    }
}

AttributeSpace::AttributeSpace(std::vector<DimensionSpec> dims, int f_min, int f_max)
    : dims_(std::move(dims)), f_min_(f_min), f_max_(f_max) {
    if (dims_.empty()) throw InvalidArgument("attribute space needs at least one dimension");
    if (f_min_ < 1) throw InvalidArgument(fmt::format("f_min must be >= 1, got {}", f_min_));
    if (f_max_ < f_min_) throw InvalidArgument(fmt::format("f_max ({}) must be >= f_min ({})", f_max_, f_min_));
    std::set<std::string> names;
    for (const auto& d : dims_) {
        d.validate();
        if (!names.insert(d.name).second) throw InvalidArgument("duplicate dimension name: " + d.name);
    }
    (void)cell_count();
}

std::optional<std::size_t> AttributeSpace::index_of(const std::string& name) const {
    for (std::size_t j = 0; j < dims_.size(); ++j)
        if (dims_[j].name == name) return j;
    return std::nullopt;
}

std::uint64_t AttributeSpace::cell_count() const {
    std::uint64_t n = 1;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        if (n > UINT64_MAX / static_cast<std::uint64_t>(f_min_)) throw InvalidArgument("cell count overflows");
        n *= static_cast<std::uint64_t>(f_min_);
    }
    return n;
}

double AttributeSpace::normalize(std::size_t j, const Value& native) const {
    const auto& d = dims_.at(j);
    if (d.kind == DimKind::Numeric) {
        const double* v = as_number(native);
        if (!v) throw DomainError(fmt::format("dimension '{}' expects a number, got '{}'", d.name, to_string(native)));
        if (!(*v >= d.lo && *v <= d.hi)) {
            throw DomainError(fmt::format("dimension '{}': {} outside [{}, {}]", d.name, *v, d.lo, d.hi));
        }
        return (*v - d.lo) / (d.hi - d.lo);
    }
    const auto* label = std::get_if<std::string>(&native);
    if (!label) throw DomainError(fmt::format("dimension '{}' expects a label, got '{}'", d.name, to_string(native)));
    auto it = std::find(d.labels.begin(), d.labels.end(), *label);
    if (it == d.labels.end()) throw DomainError(fmt::format("dimension '{}': unknown label '{}'", d.name, *label));
    const auto rank = static_cast<double>(it - d.labels.begin());
    return (rank + 0.5) / static_cast<double>(d.labels.size());
}

Value AttributeSpace::denormalize(std::size_t j, double x) const {
    const auto& d = dims_.at(j);
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError(fmt::format("normalized value {} outside [0, 1]", x));
    if (d.kind == DimKind::Numeric) return d.lo + x * (d.hi - d.lo);
    const auto m = d.labels.size();
    auto rank = static_cast<std::size_t>(x * static_cast<double>(m));
    return d.labels[std::min(rank, m - 1)];
}

int AttributeSpace::slice_of(double x) const {
    int c = std::clamp(static_cast<int>(std::floor(x * f_min_)), 0, f_min_ - 1);
    // Settle against the same boundary expressions the cells use.
    while (c > 0 && x < slice_lo(c)) --c;
    while (c < f_min_ - 1 && x >= slice_hi(c)) ++c;
    return c;
}

void validate(const AttributeSpace& space, const ResourceClaim& claim) {
    if (claim.claim_id.empty()) throw InvalidArgument("claim has empty id");
    if (claim.constraints.size() != space.dim()) {
        throw InvalidArgument(fmt::format("claim {}: {} constraints for {} dimensions", claim.claim_id,
                                          claim.constraints.size(), space.dim()));
    }
    if (claim.requested_units < 1) throw InvalidArgument("claim " + claim.claim_id + ": requested_units < 1");
    for (std::size_t j = 0; j < space.dim(); ++j) {
        const auto& d = space.dims()[j];
        const auto& c = claim.constraints[j];
        if (d.kind == DimKind::Categorical && !std::holds_alternative<Eq>(c)) {
            throw InvalidArgument(fmt::format("claim {}: categorical dimension '{}' admits only equality",
                                              claim.claim_id, d.name));
        }
        if (const auto* r = std::get_if<Range>(&c); r && !(r->lo <= r->hi)) {
            throw InvalidArgument(fmt::format("claim {}: empty range on '{}'", claim.claim_id, d.name));
        }
    }
    (void)claim_region(space, claim);
}

void validate(const AttributeSpace& space, const ResourceTicket& ticket) {
    if (ticket.point.size() != space.dim()) {
        throw InvalidArgument(fmt::format("ticket {}: {} values for {} dimensions", ticket.ticket_id,
                                          ticket.point.size(), space.dim()));
    }
    if (ticket.available_units < 0) throw InvalidArgument("ticket " + ticket.ticket_id + ": negative capacity");
    for (std::size_t j = 0; j < space.dim(); ++j) (void)space.normalize(j, ticket.point[j]);
}

std::vector<IndexCell> build_base_cells(const AttributeSpace& space) {
    const std::size_t dim = space.dim();
    const int f = space.f_min();
    const auto count = static_cast<std::size_t>(space.cell_count());

    std::vector<IndexCell> cells;
    cells.reserve(count);
    std::vector<int> coords(dim, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
        IndexCell cell;
        cell.index = idx;
        cell.coords = coords;
        for (std::size_t j = 0; j < dim; ++j) {
            const double lo = space.slice_lo(coords[j]);
            const double hi = space.slice_hi(coords[j]);
            cell.bounds.push_back({lo, hi});
            cell.control_point.push_back(static_cast<double>(2 * coords[j] + 1) / (2.0 * f));
        }
        cell.key = spatial_hash(cell);
        cells.push_back(std::move(cell));

        // Row-major increment: last dimension varies fastest.
        for (std::size_t j = dim; j-- > 0;) {
            if (++coords[j] < f) break;
            coords[j] = 0;
        }
    }
    return cells;
}

std::string control_point_text(const std::vector<double>& control_point) {
    std::string s = "cp|";
    for (std::size_t j = 0; j < control_point.size(); ++j) {
        if (j) s += ',';
        s += fmt::format("{:.6f}", control_point[j]);
    }
    return s;
}

kbr::NodeId spatial_hash(const IndexCell& cell) {
    return kbr::hash_name(control_point_text(cell.control_point));
}

std::vector<Interval> claim_region(const AttributeSpace& space, const ResourceClaim& claim) {
    if (claim.constraints.size() != space.dim()) {
        throw InvalidArgument(fmt::format("claim {}: {} constraints for {} dimensions", claim.claim_id,
                                          claim.constraints.size(), space.dim()));
    }
    std::vector<Interval> region;
    region.reserve(space.dim());
    for (std::size_t j = 0; j < space.dim(); ++j) {
        region.push_back(std::visit(
            overloaded{[&](const Eq& e) {
                           const double x = space.normalize(j, e.value);
                           return Interval{x, x};
                       },
                       [&](const Ge& g) { return Interval{space.normalize(j, g.value), 1.0}; },
                       [&](const Le& l) { return Interval{0.0, space.normalize(j, l.value)}; },
                       [&](const Range& r) {
                           return Interval{space.normalize(j, r.lo), space.normalize(j, r.hi)};
                       }},
            claim.constraints[j]));
    }
    return region;
}

std::vector<std::size_t> map_claim(const AttributeSpace& space, const std::vector<IndexCell>& cells,
                                   const ResourceClaim& claim) {
    const auto region = claim_region(space, claim);
    const int f = space.f_min();

    // Per dimension, the slices whose closed extent meets the region.
    std::vector<std::vector<int>> slices(space.dim());
    for (std::size_t j = 0; j < space.dim(); ++j) {
        for (int c = 0; c < f; ++c) {
            if (space.slice_lo(c) <= region[j].hi && region[j].lo <= space.slice_hi(c)) slices[j].push_back(c);
        }
        if (slices[j].empty()) throw ConsistencyError("claim region misses every slice of dimension " + std::to_string(j));
    }

    std::vector<std::size_t> out;
    std::vector<std::size_t> pick(space.dim(), 0);
    for (;;) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < space.dim(); ++j) idx = idx * static_cast<std::size_t>(f) + slices[j][pick[j]];
        if (idx >= cells.size()) throw InvalidArgument("cell list does not match the attribute space");
        out.push_back(idx);
        std::size_t j = space.dim();
        while (j-- > 0) {
            if (++pick[j] < slices[j].size()) break;
            pick[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1)) break;
    }
    return out;
}

std::size_t map_ticket(const AttributeSpace& space, const std::vector<IndexCell>& cells,
                       const ResourceTicket& ticket) {
    if (ticket.point.size() != space.dim()) {
        throw InvalidArgument(fmt::format("ticket {}: {} values for {} dimensions", ticket.ticket_id,
                                          ticket.point.size(), space.dim()));
    }
    std::size_t idx = 0;
    for (std::size_t j = 0; j < space.dim(); ++j) {
        idx = idx * static_cast<std::size_t>(space.f_min()) +
              static_cast<std::size_t>(space.slice_of(space.normalize(j, ticket.point[j])));
    }
    if (idx >= cells.size()) throw InvalidArgument("cell list does not match the attribute space");
    return idx;
}

bool matches(const ResourceClaim& claim, const ResourceTicket& ticket) {
    if (claim.constraints.size() != ticket.point.size()) return false;
    for (std::size_t j = 0; j < claim.constraints.size(); ++j) {
        const Value& v = ticket.point[j];
        const double* num = as_number(v);
        const bool ok = std::visit(overloaded{[&](const Eq& e) { return e.value == v; },
                                              [&](const Ge& g) { return num && *num >= g.value; },
                                              [&](const Le& l) { return num && *num <= l.value; },
                                              [&](const Range& r) { return num && *num >= r.lo && *num <= r.hi; }},
                                   claim.constraints[j]);
        if (!ok) return false;
    }
    return true;
}

}  // namespace fedmesh::spatial
