#include "mlq/types.hpp"

namespace mlq {

const char* type_name(ValueType t) {
    switch (t) {
    case ValueType::Int32: return "Int32";
    case ValueType::Long: return "Long";
    case ValueType::Float: return "Float";
    case ValueType::Double: return "Double";
    case ValueType::Boolean: return "Boolean";
    case ValueType::String: return "String";
    }
    return "?";
}

std::optional<ValueType> type_from_name(std::string_view name) {
    if (name == "Int32") return ValueType::Int32;
    if (name == "Long") return ValueType::Long;
    if (name == "Float") return ValueType::Float;
    if (name == "Double") return ValueType::Double;
    if (name == "Boolean") return ValueType::Boolean;
    if (name == "String") return ValueType::String;
    return std::nullopt;
}

} // namespace mlq
