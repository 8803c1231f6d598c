# bst data package
