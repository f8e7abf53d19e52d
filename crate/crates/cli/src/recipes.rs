//! Built-in sweeps that regenerate the figure data.

use toml::Table;

use crate::error::{nearest, CliError, Result};

/// `(name, TOML source)` of every recipe, in figure order.
pub const RECIPES: [(&str, &str); 15] = [
    ("fig1", include_str!("../recipes/fig1.toml")),
    ("fig2", include_str!("../recipes/fig2.toml")),
    ("fig3", include_str!("../recipes/fig3.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
    ("fig5", include_str!("../recipes/fig5.toml")),
    ("fig6", include_str!("../recipes/fig6.toml")),
    ("fig7", include_str!("../recipes/fig7.toml")),
    ("fig8", include_str!("../recipes/fig8.toml")),
    ("fig9", include_str!("../recipes/fig9.toml")),
    ("fig10", include_str!("../recipes/fig10.toml")),
    ("fig11", include_str!("../recipes/fig11.toml")),
    ("fig12", include_str!("../recipes/fig12.toml")),
    ("fig13", include_str!("../recipes/fig13.toml")),
    ("fig14", include_str!("../recipes/fig14.toml")),
    ("fig15", include_str!("../recipes/fig15.toml")),
];

pub fn source(name: &str) -> Result<&'static str> {
    RECIPES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| CliError::UnknownRecipe {
            name: name.to_string(),
            suggestion: nearest(name, RECIPES.iter().map(|(n, _)| *n)),
        })
}

pub fn table(name: &str) -> Result<Table> {
    Ok(source(name)?.parse().expect("built-in recipes are valid TOML"))
}

/// The recipe's title line.
pub fn title(name: &str) -> Result<String> {
    let t = table(name)?;
    Ok(t.get("plot")
        .and_then(|p| p.get("title"))
        .and_then(|t| t.as_str())
        .unwrap_or(name)
        .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn every_recipe_is_a_valid_config() {
        for (name, _) in RECIPES {
            let c = Config::from_table(&table(name).unwrap()).unwrap();
            assert_eq!(c.name, name);
        }
    }

    #[test]
    fn unknown_recipe_suggests_a_name() {
        match table("fig16") {
            Err(CliError::UnknownRecipe { suggestion, .. }) => assert!(suggestion.is_some()),
            other => panic!("{other:?}"),
        }
    }
}
