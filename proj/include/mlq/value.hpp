#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "mlq/numfmt.hpp"
#include "mlq/types.hpp"

namespace mlq {

// Raised when evaluating an expression fails at run time (integer division by
// zero is the only reachable case for type-sound models). The simulator turns
// it into an error trace event.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A typed runtime value. Integers are carried as 64-bit and floats as double
// regardless of the declared width; the declared type narrows on store so
// Int32/Float behave like 32-bit cells.
struct Value {
    ValueType type = ValueType::Int32;
    std::variant<long long, double, bool, std::string> v = 0LL;

    static Value of_int(long long x, ValueType t = ValueType::Long) {
        Value r;
        r.type = t;
        r.v = t == ValueType::Int32 ? static_cast<long long>(static_cast<std::int32_t>(x)) : x;
        return r;
    }
    static Value of_double(double x, ValueType t = ValueType::Double) {
        Value r;
        r.type = t;
        r.v = t == ValueType::Float ? static_cast<double>(static_cast<float>(x)) : x;
        return r;
    }
    static Value of_bool(bool b) {
        Value r;
        r.type = ValueType::Boolean;
        r.v = b;
        return r;
    }
    static Value of_string(std::string s) {
        Value r;
        r.type = ValueType::String;
        r.v = std::move(s);
        return r;
    }

    static Value default_for(ValueType t) {
        switch (t) {
        case ValueType::Int32:
        case ValueType::Long: return of_int(0, t);
        case ValueType::Float:
        case ValueType::Double: return of_double(0.0, t);
        case ValueType::Boolean: return of_bool(false);
        case ValueType::String: return of_string("");
        }
        return of_int(0);
    }

    bool is_int() const { return std::holds_alternative<long long>(v); }
    bool is_double() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }

    long long as_int() const { return std::get<long long>(v); }
    double as_double() const { return is_int() ? static_cast<double>(as_int()) : std::get<double>(v); }
    bool as_bool() const { return std::get<bool>(v); }
    const std::string& as_string() const { return std::get<std::string>(v); }

    // Canonical rendering used by traces, print actions, and dataset rows.
    std::string render() const {
        if (is_int()) return render_int(as_int());
        if (is_double()) return render_double(std::get<double>(v));
        if (is_bool()) return as_bool() ? "true" : "false";
        return as_string();
    }
};

// Stores a value into a slot of the declared type, applying the widening /
// narrowing rules of assignment (validated models only ever widen).
inline Value coerce_to(ValueType t, const Value& x) {
    switch (t) {
    case ValueType::Int32:
    case ValueType::Long:
        return Value::of_int(x.is_double() ? static_cast<long long>(std::llround(std::get<double>(x.v)))
                                           : x.as_int(),
                             t);
    case ValueType::Float:
    case ValueType::Double: return Value::of_double(x.as_double(), t);
    case ValueType::Boolean: return Value::of_bool(x.as_bool());
    case ValueType::String: return Value::of_string(x.is_string() ? x.as_string() : x.render());
    }
    return x;
}

// --- shared arithmetic / comparison semantics -------------------------------
//
// Both execution routes (the statechart interpreter and the replayed plan)
// defer to these helpers so the value domain cannot drift between them.

inline bool value_numeric(const Value& x) { return x.is_int() || x.is_double(); }

inline Value value_add(const Value& a, const Value& b) {
    if (a.is_string() || b.is_string()) return Value::of_string(a.render() + b.render());
    if (a.is_double() || b.is_double()) return Value::of_double(a.as_double() + b.as_double());
    return Value::of_int(a.as_int() + b.as_int());
}

inline Value value_sub(const Value& a, const Value& b) {
    if (a.is_double() || b.is_double()) return Value::of_double(a.as_double() - b.as_double());
    return Value::of_int(a.as_int() - b.as_int());
}

inline Value value_mul(const Value& a, const Value& b) {
    if (a.is_double() || b.is_double()) return Value::of_double(a.as_double() * b.as_double());
    return Value::of_int(a.as_int() * b.as_int());
}

inline Value value_div(const Value& a, const Value& b) {
    if (a.is_double() || b.is_double()) {
        // IEEE semantics; inf/nan render canonically if they ever surface.
        return Value::of_double(a.as_double() / b.as_double());
    }
    if (b.as_int() == 0) throw EvalError("integer division by zero");
    return Value::of_int(a.as_int() / b.as_int());
}

inline Value value_neg(const Value& a) {
    if (a.is_double()) return Value::of_double(-std::get<double>(a.v));
    return Value::of_int(-a.as_int());
}

inline bool value_eq(const Value& a, const Value& b) {
    if (a.is_bool() && b.is_bool()) return a.as_bool() == b.as_bool();
    if (a.is_string() && b.is_string()) return a.as_string() == b.as_string();
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    if (value_numeric(a) && value_numeric(b)) return a.as_double() == b.as_double();
    return false;
}

// three-way: negative, zero, positive — callers derive < <= > >= from it
inline int value_compare(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) {
        long long x = a.as_int(), y = b.as_int();
        return x < y ? -1 : x > y ? 1 : 0;
    }
    double x = a.as_double(), y = b.as_double();
    return x < y ? -1 : x > y ? 1 : 0;
}

} // namespace mlq
