# bst schmidt package
