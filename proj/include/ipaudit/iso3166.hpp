/*
 * Officially assigned ISO 3166-1 alpha-2 codes. Registry dumps carry
 * plenty of non-country codes ("EU", "ZZ", "AP") which must not be
 * mistaken for real countries.
 */
#pragma once

#include <string_view>

namespace ipaudit {

bool iso3166_assigned(std::string_view code);

} // namespace ipaudit
