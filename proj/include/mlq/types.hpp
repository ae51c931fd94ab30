#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mlq {

// The six value types of the modeling language. Int32/Long form the integer
// family, Float/Double the floating family; implicit widening stays inside a
// family.
enum class ValueType { Int32, Long, Float, Double, Boolean, String };

const char* type_name(ValueType t);
std::optional<ValueType> type_from_name(std::string_view name);

inline bool is_int_type(ValueType t) { return t == ValueType::Int32 || t == ValueType::Long; }
inline bool is_float_type(ValueType t) { return t == ValueType::Float || t == ValueType::Double; }
inline bool is_numeric_type(ValueType t) { return is_int_type(t) || is_float_type(t); }

inline bool same_family(ValueType a, ValueType b) {
    if (is_int_type(a) && is_int_type(b)) return true;
    if (is_float_type(a) && is_float_type(b)) return true;
    return a == b;
}

// Widest of two same-family numeric types.
inline ValueType widen(ValueType a, ValueType b) {
    if (a == ValueType::Long || b == ValueType::Long) return ValueType::Long;
    if (a == ValueType::Double || b == ValueType::Double) return ValueType::Double;
    return a; // same narrow type on both sides
}

// May a value of type `from` be stored into a slot of type `to`?
inline bool assignable(ValueType to, ValueType from) {
    if (to == from) return true;
    if (is_int_type(to) && is_int_type(from)) return to == ValueType::Long; // no narrowing
    if (is_float_type(to) && is_float_type(from)) return to == ValueType::Double;
    return false;
}

} // namespace mlq
