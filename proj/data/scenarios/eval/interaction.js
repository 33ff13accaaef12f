// Initializes interaction parameters with button configurations and movement speed
function initializeInteractionParameters() {
    return {
        //Always make button as a list, which contains all button instantiations and declare it as "button:[...]"
        buttons: [ // Array of button configurations
            {
                id: 1, // Unique identifier for the first button
                size: 1, // Size of the button, 1 indicates a single unit button
                position: [ // Position of the first button, calculated to be on the right side
                    Math.floor((2 * ShapeDisplay.grid_x) / 3),
                    Math.floor(ShapeDisplay.grid_y - 4),
                ],
                init_height: 50, // Initial height of the button above the baseline
            },
            {
                id: 2, // Unique identifier for the second button
                size: 1, // Size of the button, also a single unit button
                position: [ // Position of the second button, calculated to be on the left side
                    Math.floor(ShapeDisplay.grid_x / 3),
                    Math.floor(ShapeDisplay.grid_y - 4),
                ],
                init_height: 50, // Initial height of the button above the baseline
            },
        ],
        moveSpeed: 0.1, // Speed at which the square will move when a button is pressed
    };
}

// Main interaction logic, processes button presses and adjusts the square's position accordingly
function dynamicInteraction(deltaTime, params, parentParams) {
    initializeButtons(params); // Initializes the buttons at the start

    // Iterates over all pins to process button presses and move the square
    ShapeDisplay.Pins.forEach((pin) => {
        if (pin.isButton) {
            processButtonPress(pin, params, parentParams); // Processes button press for movement
        }
    });
}

// Processes button presses to move the square left or right based on the button pressed
function processButtonPress(pin, params, parentParams) {
    if (pin.isPressing) { // Checks if the button (pin) is being pressed
        if (pin.buttonGroup_id == 1) {
            parentParams.squarePosX += params.moveSpeed; // Moves the square to the right for button 1
        } else if (pin.buttonGroup_id == 2) {
            parentParams.squarePosX -= params.moveSpeed; // Moves the square to the left for button 2
        }
    }
}
