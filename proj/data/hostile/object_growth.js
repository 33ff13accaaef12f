function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    const o = {};
    for (let i = 0; ; i++) o['k' + i] = i;
}
