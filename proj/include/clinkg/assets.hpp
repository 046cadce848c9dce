#pragma once

#include <string_view>

// Built-in copies of the files under assets/.
namespace clinkg::assets {

std::string_view stopwords();
std::string_view refusals();
std::string_view guided_prompt();

}  // namespace clinkg::assets
