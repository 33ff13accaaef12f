function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const a = [];
    a[1e9] = 1;
    a.join(',');
}
