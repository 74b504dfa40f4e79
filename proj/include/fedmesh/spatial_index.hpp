#pragma once

#include "fedmesh/node_id.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fedmesh::spatial {

/// Native attribute value: a number (GHz, processor count) or a label.
using Value = std::variant<double, std::string>;

std::string to_string(const Value& v);

enum class DimKind { Categorical, Numeric };

struct DimensionSpec {
    std::string name;
    DimKind kind = DimKind::Numeric;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::string> labels;

    static DimensionSpec numeric(std::string name, double lo, double hi);
    static DimensionSpec categorical(std::string name, std::vector<std::string> labels);

    /// Throws InvalidArgument when the invariants do not hold.
    void validate() const;
};

/// Closed or half-open interval in normalized space; the meaning is fixed
/// by the producing function.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

class AttributeSpace {
public:
    AttributeSpace(std::vector<DimensionSpec> dims, int f_min, int f_max);

    const std::vector<DimensionSpec>& dims() const { return dims_; }
    std::size_t dim() const { return dims_.size(); }
    int f_min() const { return f_min_; }
    int f_max() const { return f_max_; }
    std::optional<std::size_t> index_of(const std::string& name) const;

    /// f_min^dim; throws InvalidArgument if it does not fit in 64 bits.
    std::uint64_t cell_count() const;

    /// Maps a native value into [0,1]. Throws DomainError when out of bounds,
    /// an unknown label, or the wrong value type for the dimension.
    double normalize(std::size_t dim_index, const Value& native) const;
    /// Inverse of normalize (categorical: label whose slot contains x).
    Value denormalize(std::size_t dim_index, double x) const;

    /// Slice [0, f_min) of a normalized coordinate under half-open bounds,
    /// with 1.0 belonging to the last slice.
    int slice_of(double x) const;
    double slice_lo(int c) const { return static_cast<double>(c) / f_min_; }
    double slice_hi(int c) const { return static_cast<double>(c + 1) / f_min_; }

private:
    std::vector<DimensionSpec> dims_;
    int f_min_;
    int f_max_;
};

struct IndexCell {
    std::size_t index = 0;          // row-major position in build_base_cells
    std::vector<int> coords;
    std::vector<Interval> bounds;   // [lo, hi); last slice closed above
    std::vector<double> control_point;
    kbr::NodeId key;
};

// Per-dimension claim constraints. Strict ">"/"<" in claim text map onto
// the inclusive forms.
struct Eq { Value value; };
struct Ge { double value; };
struct Le { double value; };
struct Range { double lo; double hi; };
using Constraint = std::variant<Eq, Ge, Le, Range>;

std::string to_string(const Constraint& c);

struct ResourceClaim {
    std::string claim_id;
    std::vector<Constraint> constraints;  // one per dimension
    int requested_units = 1;
    std::string origin;                   // posting scheduler
    std::int64_t arrival_time_ms = 0;
    std::string job_ref;
};

struct ResourceTicket {
    std::string ticket_id;
    std::vector<Value> point;             // one per dimension
    int available_units = 0;
    std::string origin;                   // issuing node
    std::int64_t issue_time_ms = 0;
};

/// Throws InvalidArgument / DomainError on malformed objects.
void validate(const AttributeSpace& space, const ResourceClaim& claim);
void validate(const AttributeSpace& space, const ResourceTicket& ticket);

/// f_min^dim cells in row-major order of coords (dimension 0 most significant).
std::vector<IndexCell> build_base_cells(const AttributeSpace& space);

/// "cp|" + coordinates with 6 fractional digits joined by ",".
std::string control_point_text(const std::vector<double>& control_point);

kbr::NodeId spatial_hash(const IndexCell& cell);

/// Closed per-dimension interval covered by the claim.
std::vector<Interval> claim_region(const AttributeSpace& space, const ResourceClaim& claim);

/// Indices (into `cells`) of every cell whose bounds meet the claim region.
std::vector<std::size_t> map_claim(const AttributeSpace& space, const std::vector<IndexCell>& cells,
                                   const ResourceClaim& claim);

/// Index of the unique cell containing the ticket point.
std::size_t map_ticket(const AttributeSpace& space, const std::vector<IndexCell>& cells,
                       const ResourceTicket& ticket);

/// Per-dimension constraint check on native values. Capacity is not checked.
bool matches(const ResourceClaim& claim, const ResourceTicket& ticket);

}  // namespace fedmesh::spatial
