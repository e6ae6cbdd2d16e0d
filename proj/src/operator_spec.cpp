#include "quadsum/operator_spec.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "quadsum/errors.hpp"

namespace quadsum {

using json = nlohmann::json;
using Tag = StructureCertificate::Tag;

namespace {

Scalar scalar_from_json(const json& j, Field f) {
    if (j.is_string()) return Scalar::parse(f, j.get<std::string>());
    if (j.is_number_integer()) return Scalar(f, static_cast<long>(j.get<std::int64_t>()));
    throw SpecParseError("expected a scalar string, got " + j.dump());
}

Index index_from_json(const json& j, const char* what) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw SpecParseError(std::string(what) + " must be a non-negative integer, got " + j.dump());
    }
    return static_cast<Index>(j.get<std::int64_t>());
}

const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SpecParseError(std::string("missing key '") + key + "' in " + j.dump());
    return j.at(key);
}

std::vector<Scalar> scalar_list(const json& j, Field f) {
    if (!j.is_array() || j.empty()) throw SpecParseError("expected a non-empty scalar list, got " + j.dump());
    std::vector<Scalar> out;
    for (const auto& item : j) out.push_back(scalar_from_json(item, f));
    return out;
}

FinVector vector_from_json(const json& j, Field f) {
    if (!j.is_array()) throw SpecParseError("expected [[index, scalar], ...], got " + j.dump());
    std::vector<FinVector::Entry> entries;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw SpecParseError("bad vector entry " + pair.dump());
        entries.emplace_back(index_from_json(pair[0], "vector index"), scalar_from_json(pair[1], f));
    }
    return FinVector(f, std::move(entries));
}

json vector_to_json(const FinVector& v) {
    json out = json::array();
    for (const auto& [index, value] : v.entries()) out.push_back(json::array({index, value.to_string()}));
    return out;
}

SpecPtr make(OperatorSpec spec) { return std::make_shared<const OperatorSpec>(std::move(spec)); }

std::vector<std::pair<long, Scalar>> canonical_band(std::vector<std::pair<long, Scalar>> terms) {
    std::map<long, Scalar> merged;
    for (auto& [offset, coeff] : terms) {
        auto it = merged.find(offset);
        if (it == merged.end()) {
            merged.emplace(offset, coeff);
        } else {
            it->second += coeff;
        }
    }
    std::vector<std::pair<long, Scalar>> out;
    for (auto& [offset, coeff] : merged) {
        if (!coeff.is_zero()) out.emplace_back(offset, coeff);
    }
    return out;
}

SpecPtr spec_from_json(const json& j, Field f) {
    const std::string kind = member(j, "kind").get<std::string>();
    if (kind == "shift") return spec::shift();
    if (kind == "scalar") return spec::scalar(scalar_from_json(member(j, "value"), f));
    if (kind == "diagonal") {
        if (j.contains("periodic")) return spec::diagonal_periodic(scalar_list(j.at("periodic"), f));
        const json& affine = member(j, "affine");
        return spec::diagonal_affine(scalar_from_json(member(affine, "start"), f),
                                     scalar_from_json(member(affine, "step"), f));
    }
    if (kind == "jordan_blocks") {
        const json& sizes = member(j, "sizes");
        spec::BlockSizes rule;
        auto size_list = [](const json& arr) {
            if (!arr.is_array() || arr.empty()) throw SpecParseError("block sizes must be a non-empty list");
            std::vector<Index> out;
            for (const auto& s : arr) out.push_back(index_from_json(s, "block size"));
            return out;
        };
        if (sizes.contains("periodic")) {
            rule.kind = spec::BlockSizes::Kind::Periodic;
            rule.list = size_list(sizes.at("periodic"));
        } else if (sizes.contains("arithmetic")) {
            rule.kind = spec::BlockSizes::Kind::Arithmetic;
            rule.start = index_from_json(member(sizes.at("arithmetic"), "start"), "start");
            rule.step = index_from_json(member(sizes.at("arithmetic"), "step"), "step");
        } else if (sizes.contains("list")) {
            rule.kind = spec::BlockSizes::Kind::ListThenInfinite;
            rule.list = sizes.at("list").empty() ? std::vector<Index>{} : size_list(sizes.at("list"));
            if (member(sizes, "tail").get<std::string>() != "infinite") {
                throw SpecParseError("jordan_blocks list sizes need \"tail\": \"infinite\"");
            }
        } else {
            throw SpecParseError("jordan_blocks sizes must be periodic, arithmetic or list: " + sizes.dump());
        }
        return spec::jordan(std::move(rule), scalar_list(member(j, "eigenvalues"), f));
    }
    if (kind == "banded_periodic") {
        const json& pattern = member(j, "pattern");
        if (!pattern.is_array() || pattern.empty()) throw SpecParseError("banded_periodic needs a non-empty pattern");
        std::vector<std::vector<std::pair<long, Scalar>>> rows;
        for (const auto& residue : pattern) {
            if (!residue.is_array()) throw SpecParseError("pattern row must be a list: " + residue.dump());
            std::vector<std::pair<long, Scalar>> terms;
            for (const auto& term : residue) {
                if (!term.is_array() || term.size() != 2 || !term[0].is_number_integer()) {
                    throw SpecParseError("pattern term must be [offset, scalar]: " + term.dump());
                }
                terms.emplace_back(static_cast<long>(term[0].get<std::int64_t>()), scalar_from_json(term[1], f));
            }
            rows.push_back(std::move(terms));
        }
        return spec::banded_periodic(std::move(rows));
    }
    if (kind == "finite_patch") {
        std::vector<std::pair<Index, FinVector>> overrides;
        for (const auto& o : member(j, "overrides")) {
            overrides.emplace_back(index_from_json(member(o, "column"), "column"),
                                   vector_from_json(member(o, "image"), f));
        }
        return spec::finite_patch(spec_from_json(member(j, "base"), f), std::move(overrides));
    }
    auto children = [&](const char* key) {
        const json& arr = member(j, key);
        if (!arr.is_array() || arr.empty()) throw SpecParseError(std::string(key) + " must be a non-empty list");
        std::vector<SpecPtr> out;
        for (const auto& child : arr) out.push_back(spec_from_json(child, f));
        return out;
    };
    if (kind == "sum") return spec::sum(children("terms"));
    if (kind == "compose") return spec::compose(children("factors"));
    if (kind == "scale") return spec::scale(scalar_from_json(member(j, "factor"), f), spec_from_json(member(j, "of"), f));
    throw SpecParseError("unknown kind '" + kind + "'");
}

json spec_to_json(const OperatorSpec& s) {
    return std::visit(
        [](const auto& node) -> json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, spec::Shift>) {
                return {{"kind", "shift"}};
            } else if constexpr (std::is_same_v<T, spec::ScalarMul>) {
                return {{"kind", "scalar"}, {"value", node.value.to_string()}};
            } else if constexpr (std::is_same_v<T, spec::Diagonal>) {
                json out = {{"kind", "diagonal"}};
                if (node.affine) {
                    out["affine"] = {{"start", node.affine->first.to_string()},
                                     {"step", node.affine->second.to_string()}};
                } else {
                    json values = json::array();
                    for (const auto& v : node.periodic) values.push_back(v.to_string());
                    out["periodic"] = values;
                }
                return out;
            } else if constexpr (std::is_same_v<T, spec::JordanBlocks>) {
                json sizes;
                switch (node.sizes.kind) {
                case spec::BlockSizes::Kind::Periodic: sizes = {{"periodic", node.sizes.list}}; break;
                case spec::BlockSizes::Kind::Arithmetic:
                    sizes = {{"arithmetic", {{"start", node.sizes.start}, {"step", node.sizes.step}}}};
                    break;
                case spec::BlockSizes::Kind::ListThenInfinite:
                    sizes = {{"list", node.sizes.list}, {"tail", "infinite"}};
                    break;
                }
                json eig = json::array();
                for (const auto& v : node.eigenvalues) eig.push_back(v.to_string());
                return {{"kind", "jordan_blocks"}, {"sizes", sizes}, {"eigenvalues", eig}};
            } else if constexpr (std::is_same_v<T, spec::BandedPeriodic>) {
                json pattern = json::array();
                for (const auto& row : node.pattern) {
                    json terms = json::array();
                    for (const auto& [offset, coeff] : row) terms.push_back(json::array({offset, coeff.to_string()}));
                    pattern.push_back(terms);
                }
                return {{"kind", "banded_periodic"}, {"pattern", pattern}};
            } else if constexpr (std::is_same_v<T, spec::FinitePatch>) {
                json overrides = json::array();
                for (const auto& [column, image] : node.overrides) {
                    overrides.push_back({{"column", column}, {"image", vector_to_json(image)}});
                }
                return {{"kind", "finite_patch"}, {"base", spec_to_json(*node.base)}, {"overrides", overrides}};
            } else if constexpr (std::is_same_v<T, spec::Sum>) {
                json terms = json::array();
                for (const auto& t : node.terms) terms.push_back(spec_to_json(*t));
                return {{"kind", "sum"}, {"terms", terms}};
            } else if constexpr (std::is_same_v<T, spec::Compose>) {
                json factors = json::array();
                for (const auto& t : node.factors) factors.push_back(spec_to_json(*t));
                return {{"kind", "compose"}, {"factors", factors}};
            } else {
                return {{"kind", "scale"}, {"factor", node.factor.to_string()}, {"of", spec_to_json(*node.of)}};
            }
        },
        s.node);
}

struct BlockPosition {
    Index block = 0;
    Index start = 0;
    std::optional<Index> size;  // nullopt: infinite block
};

BlockPosition locate_block(const spec::BlockSizes& sizes, Index n) {
    using Kind = spec::BlockSizes::Kind;
    BlockPosition pos;
    if (sizes.kind == Kind::Periodic) {
        Index total = 0;
        for (Index s : sizes.list) total += s;
        Index periods = n / total;
        pos.block = periods * sizes.list.size();
        pos.start = periods * total;
        for (Index s : sizes.list) {
            if (n < pos.start + s) {
                pos.size = s;
                return pos;
            }
            pos.start += s;
            ++pos.block;
        }
    } else if (sizes.kind == Kind::Arithmetic) {
        Index size = sizes.start;
        while (n >= pos.start + size) {
            pos.start += size;
            ++pos.block;
            size += sizes.step;
        }
        pos.size = size;
        return pos;
    } else {
        for (Index s : sizes.list) {
            if (n < pos.start + s) {
                pos.size = s;
                return pos;
            }
            pos.start += s;
            ++pos.block;
        }
        return pos;
    }
    return pos;
}

void require_field(const Scalar& s, Field f) {
    if (!(s.field() == f)) throw FieldMismatch("spec scalar " + s.to_string() + " is not over " + f.to_string());
}

Endomorphism build_jordan(const spec::JordanBlocks& node, Field f) {
    for (const auto& v : node.eigenvalues) require_field(v, f);
    if (node.sizes.kind == spec::BlockSizes::Kind::Arithmetic && node.sizes.start == 0) {
        throw SpecParseError("block sizes must be positive");
    }
    for (Index s : node.sizes.list) {
        if (s == 0) throw SpecParseError("block sizes must be positive");
    }
    Endomorphism::Traits traits;
    traits.band = 1;
    if (node.sizes.kind == spec::BlockSizes::Kind::ListThenInfinite) {
        Index start = 0;
        for (Index s : node.sizes.list) start += s;
        traits.certificate = StructureCertificate::free_shift_like(start, 1);
    } else {
        traits.certificate = StructureCertificate::locally_algebraic();
    }
    return Endomorphism(
        f,
        [node, f](Index n) {
            BlockPosition pos = locate_block(node.sizes, n);
            const Scalar& lambda = node.eigenvalues[pos.block % node.eigenvalues.size()];
            std::vector<FinVector::Entry> entries{{n, lambda}};
            if (!pos.size || n + 1 < pos.start + *pos.size) entries.emplace_back(n + 1, Scalar::one(f));
            return FinVector(f, std::move(entries));
        },
        std::move(traits), "jordan_blocks");
}

Endomorphism build_banded(const spec::BandedPeriodic& node, Field f) {
    Index period = node.pattern.size();
    std::vector<std::optional<long>> top_offset(period);
    bool multiples = period > 1;
    for (Index r = 0; r < period; ++r) {
        for (const auto& [offset, coeff] : node.pattern[r]) {
            require_field(coeff, f);
            if (coeff.is_zero()) continue;
            top_offset[r] = std::max(top_offset[r].value_or(offset), offset);
            if (offset % static_cast<long>(period) != 0) multiples = false;
        }
    }
    long global_top = 0;
    bool any = false;
    for (const auto& t : top_offset) {
        if (t) {
            global_top = any ? std::max(global_top, *t) : *t;
            any = true;
        }
    }
    Endomorphism::Traits traits;
    traits.band = static_cast<Index>(std::max(0L, global_top));
    if (!any) traits.zero_columns_from = 0;
    bool uniform = any && global_top >= 1 &&
                   std::all_of(top_offset.begin(), top_offset.end(),
                               [&](const std::optional<long>& t) { return t && *t == global_top; });
    if (!any || global_top <= 0) {
        traits.certificate = StructureCertificate::locally_algebraic();
    } else if (uniform) {
        traits.certificate = StructureCertificate::free_shift_like(0, static_cast<Index>(global_top));
    } else if (multiples) {
        std::vector<StructureCertificate::BlockClaim> claims;
        for (Index r = 0; r < period; ++r) {
            StructureCertificate::BlockClaim claim;
            claim.block = BlockDescriptor::residue(r, period);
            if (!top_offset[r] || *top_offset[r] <= 0) {
                claim.tag = Tag::LocallyAlgebraic;
            } else {
                claim.tag = Tag::FreeShiftLike;
                claim.growth = static_cast<Index>(*top_offset[r]) / period;
            }
            claims.push_back(claim);
        }
        traits.certificate = StructureCertificate::block_direct_sum(std::move(claims));
    }
    return Endomorphism(
        f,
        [node, f, period](Index n) {
            std::vector<FinVector::Entry> entries;
            for (const auto& [offset, coeff] : node.pattern[n % period]) {
                long target = static_cast<long>(n) + offset;
                if (target >= 0) entries.emplace_back(static_cast<Index>(target), coeff);
            }
            return FinVector(f, std::move(entries));
        },
        std::move(traits), "banded_periodic");
}

Endomorphism build_patch(const spec::FinitePatch& node, Field f) {
    Endomorphism base = make_operator(*node.base, f);
    std::map<Index, FinVector> overrides;
    Index max_col = 0;
    std::optional<Index> band = base.traits().band;
    for (const auto& [column, image] : node.overrides) {
        if (!(image.field() == f)) throw FieldMismatch("finite_patch override over " + image.field().to_string());
        overrides.emplace(column, image);
        max_col = std::max(max_col, column);
        if (band && !image.is_zero() && image.top() > column) band = std::max(*band, image.top() - column);
    }
    Endomorphism::Traits traits;
    traits.band = band;
    if (base.traits().zero_columns_from) {
        traits.zero_columns_from = std::max(*base.traits().zero_columns_from, node.overrides.empty() ? 0 : max_col + 1);
    }
    const auto& cert = base.certificate();
    if (traits.zero_columns_from || cert.tag == Tag::LocallyAlgebraic) {
        traits.certificate = StructureCertificate::locally_algebraic();
    } else if (cert.tag == Tag::FreeShiftLike) {
        traits.certificate = StructureCertificate::free_shift_like(
            node.overrides.empty() ? cert.generator : std::max(cert.generator, max_col + 1), cert.growth);
    } else if (cert.tag == Tag::BlockDirectSum) {
        auto claims = cert.blocks;
        bool preserved = true;
        for (const auto& [column, image] : node.overrides) {
            for (auto& claim : claims) {
                if (!claim.block.contains(column)) continue;
                for (const auto& entry : image.entries()) preserved = preserved && claim.block.contains(entry.first);
                claim.generator = std::max(claim.generator, claim.block.to_local(column) + 1);
            }
        }
        if (preserved) traits.certificate = StructureCertificate::block_direct_sum(std::move(claims));
    }
    return Endomorphism(
        f,
        [base, overrides = std::move(overrides)](Index n) {
            auto it = overrides.find(n);
            return it != overrides.end() ? it->second : base.column(n);
        },
        std::move(traits), "finite_patch(" + base.description() + ")");
}

} // namespace

namespace spec {

SpecPtr shift() { return make({Shift{}}); }
SpecPtr scalar(const Scalar& value) { return make({ScalarMul{value}}); }

SpecPtr diagonal_periodic(std::vector<Scalar> values) {
    if (values.empty()) throw SpecParseError("diagonal needs at least one value");
    return make({Diagonal{std::move(values), std::nullopt}});
}

SpecPtr diagonal_affine(const Scalar& start, const Scalar& step) {
    return make({Diagonal{{}, std::pair{start, step}}});
}

SpecPtr jordan(BlockSizes sizes, std::vector<Scalar> eigenvalues) {
    if (eigenvalues.empty()) throw SpecParseError("jordan_blocks needs at least one eigenvalue");
    return make({JordanBlocks{std::move(sizes), std::move(eigenvalues)}});
}

SpecPtr banded_periodic(std::vector<std::vector<std::pair<long, Scalar>>> pattern) {
    if (pattern.empty()) throw SpecParseError("banded_periodic needs a non-empty pattern");
    for (auto& row : pattern) row = canonical_band(std::move(row));
    return make({BandedPeriodic{std::move(pattern)}});
}

SpecPtr finite_patch(SpecPtr base, std::vector<std::pair<Index, FinVector>> overrides) {
    std::sort(overrides.begin(), overrides.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < overrides.size(); ++i) {
        if (overrides[i].first == overrides[i - 1].first) {
            throw SpecParseError("column " + std::to_string(overrides[i].first) + " overridden twice");
        }
    }
    return make({FinitePatch{std::move(base), std::move(overrides)}});
}

SpecPtr sum(std::vector<SpecPtr> terms) {
    if (terms.empty()) throw SpecParseError("sum needs at least one term");
    return make({Sum{std::move(terms)}});
}

SpecPtr compose(std::vector<SpecPtr> factors) {
    if (factors.empty()) throw SpecParseError("compose needs at least one factor");
    return make({Compose{std::move(factors)}});
}

SpecPtr scale(const Scalar& factor, SpecPtr of) { return make({Scale{factor, std::move(of)}}); }

} // namespace spec

OperatorFile parse_operator_file(const std::string& json_text, Field default_field) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SpecParseError(e.what());
    }
    OperatorFile file;
    try {
        file.field = j.contains("field") ? Field::parse(j.at("field").get<std::string>()) : default_field;
        file.op = spec_from_json(member(j, "op"), file.field);
    } catch (const json::exception& e) {
        throw SpecParseError(e.what());
    } catch (const ParseError& e) {
        throw SpecParseError(e.what());
    }
    return file;
}

std::string serialize_operator_file(const OperatorFile& file, int indent) {
    json j = {{"field", file.field.to_string()}, {"op", spec_to_json(*file.op)}};
    return j.dump(indent);
}

SpecPtr parse_operator_spec(const std::string& json_text, Field f) {
    try {
        return spec_from_json(json::parse(json_text), f);
    } catch (const json::exception& e) {
        throw SpecParseError(e.what());
    }
}

std::string serialize_operator_spec(const OperatorSpec& s) { return spec_to_json(s).dump(); }

Endomorphism make_operator(const OperatorSpec& s, Field f) {
    return std::visit(
        [f](const auto& node) -> Endomorphism {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, spec::Shift>) {
                return shift_operator(f);
            } else if constexpr (std::is_same_v<T, spec::ScalarMul>) {
                require_field(node.value, f);
                return scalar_operator(node.value);
            } else if constexpr (std::is_same_v<T, spec::Diagonal>) {
                Endomorphism::Traits traits;
                traits.certificate = StructureCertificate::locally_algebraic();
                traits.band = 0;
                if (node.affine) {
                    require_field(node.affine->first, f);
                    require_field(node.affine->second, f);
                    auto [start, step] = *node.affine;
                    return Endomorphism(
                        f,
                        [start, step, f](Index n) {
                            Scalar value = start + Scalar(f, mpq_class(mpz_class(std::to_string(n)))) * step;
                            return FinVector::unit(n, value);
                        },
                        std::move(traits), "diagonal");
                }
                bool all_zero = true;
                for (const auto& v : node.periodic) {
                    require_field(v, f);
                    all_zero = all_zero && v.is_zero();
                }
                if (all_zero) traits.zero_columns_from = 0;
                if (node.periodic.size() == 1) traits.scalar_value = node.periodic.front();
                auto values = node.periodic;
                return Endomorphism(
                    f, [values](Index n) { return FinVector::unit(n, values[n % values.size()]); }, std::move(traits),
                    "diagonal");
            } else if constexpr (std::is_same_v<T, spec::JordanBlocks>) {
                return build_jordan(node, f);
            } else if constexpr (std::is_same_v<T, spec::BandedPeriodic>) {
                return build_banded(node, f);
            } else if constexpr (std::is_same_v<T, spec::FinitePatch>) {
                return build_patch(node, f);
            } else if constexpr (std::is_same_v<T, spec::Sum>) {
                Endomorphism acc = make_operator(*node.terms.front(), f);
                for (std::size_t i = 1; i < node.terms.size(); ++i) acc = add(acc, make_operator(*node.terms[i], f));
                return acc;
            } else if constexpr (std::is_same_v<T, spec::Compose>) {
                Endomorphism acc = make_operator(*node.factors.back(), f);
                for (std::size_t i = node.factors.size() - 1; i-- > 0;) {
                    acc = compose(make_operator(*node.factors[i], f), acc);
                }
                return acc;
            } else {
                require_field(node.factor, f);
                return scale(node.factor, make_operator(*node.of, f));
            }
        },
        s.node);
}

} // namespace quadsum
