#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlq/ast.hpp"
#include "mlq/da_spec.hpp"
#include "mlq/types.hpp"

namespace mlq {

// A thing with all included fragments flattened in and every name checked.
// Declaration order is preserved everywhere; indices into these vectors are
// the canonical numbering used by the runtime and the plan backend alike.
struct ResolvedThing {
    std::string name;
    std::vector<ast::Annotation> annotations;
    std::vector<ast::Port> ports;
    std::vector<ast::Message> messages;
    std::vector<ast::Property> properties;
    std::vector<DataAnalyticsSpec> analytics;
    std::optional<ast::StateChart> chart;

    int port_index(std::string_view n) const;
    int message_index(std::string_view n) const;
    int property_index(std::string_view n) const;
    int analytics_index(std::string_view n) const;
    int state_index(std::string_view n) const;

    ValueType property_type(int index) const;
};

struct ResolvedInstance {
    std::string name;
    int thing = -1; // index into ResolvedModel::things
};

struct ResolvedConnector {
    int from_instance = -1;
    int from_port = -1; // port index within the instance's thing
    int to_instance = -1;
    int to_port = -1;
};

struct ResolvedConfiguration {
    std::string name;
    std::vector<ast::Annotation> annotations;
    std::vector<ResolvedInstance> instances;
    std::vector<ResolvedConnector> connectors;

    int instance_index(std::string_view n) const;
};

struct ResolvedModel {
    std::vector<ast::Annotation> annotations;
    std::vector<ResolvedThing> things; // fragments do not survive resolution
    std::vector<ResolvedConfiguration> configurations;
    std::string source_path;

    int thing_index(std::string_view n) const;
    int configuration_index(std::string_view n) const;
};

} // namespace mlq
